//! Shadow-driven neural quantum state tomography.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`] dense state vectors, density matrices, gates, Pauli strings and Kraus channels.
//! * [`targets`] the Trotter-evolved and GHZ target states plus their observables.
//! * [`clifford`] uniform Clifford sampling, gate synthesis and stabilizer amplitudes.
//! * [`shadows`] classical-shadow collection, the on-disk shadow format and estimators.
//! * [`nqs`] the autoregressive transformer wavefunction with hand-written gradients.
//! * [`training`] cross-entropy and infidelity objectives, Adam, and the training protocols.
//! * [`report`] evaluation tables for trained models.
//!
//! Bit-string convention: qubit 0 is the leftmost character of a bit-string and the most
//! significant bit of the basis index. Spin up is `0`, spin down is `1`.

pub mod clifford;
mod error;
pub mod nqs;
pub mod quantum;
pub mod report;
pub mod rng;
pub mod shadows;
pub mod targets;
pub mod training;

pub use error::{Error, Result};
pub use num_complex::Complex64;
