//! Dense simulation of pure and mixed states.

mod channel;
mod density;
mod gate;
mod pauli;
mod state;

pub use channel::KrausChannel;
pub use density::{apply_kraus, DensityMatrix};
pub use gate::{Gate, GateKind};
pub use pauli::{Pauli, PauliBasis, PauliString};
pub use state::{apply_gate, StateVector};
pub(crate) use state::{rotation_element, sample_index};

use crate::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

/// Largest supported register. Density matrices at this size hold 2^24 entries.
pub const MAX_QUBITS: usize = 12;

/// Bit position of qubit `q` inside a basis index of an `n`-qubit register.
#[inline]
pub fn qubit_bit(q: usize, n: usize) -> usize {
    n - 1 - q
}

/// Value of qubit `q` in the basis index `index`.
#[inline]
pub fn bit_of(index: u64, q: usize, n: usize) -> u64 {
    (index >> qubit_bit(q, n)) & 1
}

/// Anything that can report `<s|psi>` for a basis index `s`.
pub trait AmplitudeOracle {
    fn qubits(&self) -> usize;
    fn query(&self, s: u64) -> Complex64;
}

impl AmplitudeOracle for StateVector {
    fn qubits(&self) -> usize {
        self.n()
    }

    fn query(&self, s: u64) -> Complex64 {
        self.amplitude(s)
    }
}

/// A computational-basis measurement outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    value: u64,
}

impl BitString {
    pub fn new(len: usize, value: u64) -> Self {
        debug_assert!(len <= 64 && (len == 64 || value >> len == 0));
        Self { len, value }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn bit(&self, q: usize) -> u64 {
        bit_of(self.value, q, self.len)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len {
            f.write_str(if self.bit(q) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > 64 {
            return Err(Error::Format(format!("bad bit-string length {}", s.len())));
        }
        let mut value = 0u64;
        for c in s.chars() {
            value = (value << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Format(format!("bad bit-string character {c:?}"))),
                };
        }
        Ok(Self { len: s.len(), value })
    }
}

pub(crate) fn check_targets(targets: &[usize], n: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::QubitOutOfRange { index: t, n });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateTarget(t));
        }
    }
    Ok(())
}

/// Applies a `2^k x 2^k` row-major matrix to the index bits `positions` of `data`.
///
/// `positions[0]` is the most significant bit of the local index. `data` has length
/// `2^total_bits`.
pub(crate) fn apply_local(data: &mut [Complex64], positions: &[usize], matrix: &[Complex64]) {
    let k = positions.len();
    let local = 1usize << k;
    debug_assert_eq!(matrix.len(), local * local);
    let mask: usize = positions.iter().map(|&p| 1usize << p).sum();
    let offsets: Vec<usize> = (0..local)
        .map(|l| {
            positions
                .iter()
                .enumerate()
                .filter(|(j, _)| (l >> (k - 1 - j)) & 1 == 1)
                .map(|(_, &p)| 1usize << p)
                .sum()
        })
        .collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); local];
    for base in 0..data.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, &off) in offsets.iter().enumerate() {
            buf[l] = data[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let row = &matrix[r * local..(r + 1) * local];
            data[base | off] = row.iter().zip(&buf).map(|(m, v)| m * v).sum();
        }
    }
}
