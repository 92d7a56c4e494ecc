use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::nqs::{Mode, Nqs, WaveAmplitude};
use crate::quantum::{AmplitudeOracle, StateVector};
use crate::{Error, Result};

/// Either one network carrying both heads, or an amplitude network paired with a phase
/// network. In the split form only the phase network is trained by the overlap objectives.
#[derive(Clone, Debug, PartialEq)]
pub enum Ansatz {
    Joint(Nqs),
    Split { amplitude: Nqs, phase: Nqs },
}

impl Ansatz {
    pub fn split(amplitude: Nqs, phase: Nqs) -> Result<Self> {
        if amplitude.mode() != Mode::AmplitudeOnly || phase.mode() != Mode::PhaseOnly {
            return Err(Error::InvalidParameter(
                "split ansatz needs an amplitude-only and a phase-only network".into(),
            ));
        }
        if amplitude.n() != phase.n() {
            return Err(Error::DimensionMismatch {
                expected: amplitude.n(),
                found: phase.n(),
            });
        }
        Ok(Ansatz::Split { amplitude, phase })
    }

    pub fn joint(net: Nqs) -> Result<Self> {
        if net.mode() != Mode::Both {
            return Err(Error::InvalidParameter("joint ansatz needs both output heads".into()));
        }
        Ok(Ansatz::Joint(net))
    }

    /// Rebuilds an ansatz from the networks stored in a checkpoint.
    pub fn from_networks(mut nets: Vec<Nqs>) -> Result<Self> {
        match nets.len() {
            1 => Self::joint(nets.remove(0)),
            2 => {
                let phase = nets.remove(1);
                Self::split(nets.remove(0), phase)
            }
            k => Err(Error::Format(format!("expected one or two networks, found {k}"))),
        }
    }

    pub fn networks(&self) -> Vec<&Nqs> {
        match self {
            Ansatz::Joint(net) => vec![net],
            Ansatz::Split { amplitude, phase } => vec![amplitude, phase],
        }
    }

    pub fn n(&self) -> usize {
        self.sampler().n()
    }

    pub fn forward(&self, s: u64) -> WaveAmplitude {
        match self {
            Ansatz::Joint(net) => net.forward(s),
            Ansatz::Split { amplitude, phase } => WaveAmplitude {
                log_sqrt_p: amplitude.forward(s).log_sqrt_p,
                phase_raw: phase.forward(s).phase_raw,
            },
        }
    }

    pub fn forward_many(&self, strings: &[u64]) -> Vec<WaveAmplitude> {
        match self {
            Ansatz::Joint(net) => net.forward_many(strings),
            Ansatz::Split { amplitude, phase } => amplitude
                .forward_many(strings)
                .into_iter()
                .zip(phase.forward_many(strings))
                .map(|(a, b)| WaveAmplitude {
                    log_sqrt_p: a.log_sqrt_p,
                    phase_raw: b.phase_raw,
                })
                .collect(),
        }
    }

    /// The network that defines the sampling distribution.
    pub fn sampler(&self) -> &Nqs {
        match self {
            Ansatz::Joint(net) => net,
            Ansatz::Split { amplitude, .. } => amplitude,
        }
    }

    /// The network the overlap objectives differentiate.
    pub fn trainable(&self) -> &Nqs {
        match self {
            Ansatz::Joint(net) => net,
            Ansatz::Split { phase, .. } => phase,
        }
    }

    pub fn trainable_mut(&mut self) -> &mut Nqs {
        match self {
            Ansatz::Joint(net) => net,
            Ansatz::Split { phase, .. } => phase,
        }
    }

    pub fn sample_counts<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<BTreeMap<u64, usize>> {
        self.sampler().sample_counts(count, rng)
    }

    pub fn to_amplitudes(&self) -> Vec<Complex64> {
        let all: Vec<u64> = (0..1u64 << self.n()).collect();
        self.forward_many(&all).into_iter().map(|w| w.psi()).collect()
    }

    pub fn to_state_vector(&self) -> Result<StateVector> {
        StateVector::normalized(self.to_amplitudes())
    }
}

impl AmplitudeOracle for Ansatz {
    fn qubits(&self) -> usize {
        self.n()
    }

    fn query(&self, s: u64) -> Complex64 {
        self.forward(s).psi()
    }
}

/// `1 - |<target|psi>|^2` by exhaustive summation.
pub fn exact_infidelity(ansatz: &Ansatz, target: &StateVector) -> Result<f64> {
    if target.n() != ansatz.n() {
        return Err(Error::DimensionMismatch {
            expected: target.n(),
            found: ansatz.n(),
        });
    }
    let overlap: Complex64 = ansatz
        .to_amplitudes()
        .iter()
        .zip(target.amps())
        .map(|(p, t)| p.conj() * t)
        .sum();
    Ok((1.0 - overlap.norm_sqr()).max(0.0))
}
