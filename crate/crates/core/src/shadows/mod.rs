//! Randomized Clifford measurements of a simulated device and shadow-based estimators.

mod estimators;
mod io;

pub use estimators::{
    estimate_fidelity, f_amplitude_damping, f_of_channel, fid_of_channel, median_of_means,
    noise_free_f, shadow_fidelities, transformed_loss,
};
pub use io::{read_shadow_set, write_shadow_set, SHADOW_FORMAT_VERSION, SHADOW_MAGIC};

use rand::Rng;
use rayon::prelude::*;

use crate::clifford::{decompose, sample_uniform_clifford, CliffordElement, StabilizerState};
use crate::quantum::{sample_index, BitString, DensityMatrix, GateKind, KrausChannel, StateVector};
use crate::rng::{substream, Stream};
use crate::{Error, Result};

/// Noise acting on the measurement circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseModel {
    None,
    /// Amplitude damping on every qubit right before measurement; `p` is the survival
    /// probability of `|1>`, so `p = 1` is noiseless.
    AmplitudeDamping(f64),
    /// Two-qubit depolarizing channel with strength `f` after every CNOT of the decomposed
    /// circuit; `f = 1` is noiseless.
    CnotDepolarizing(f64),
    /// An `n`-qubit channel applied right before measurement.
    Custom(KrausChannel),
}

impl NoiseModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            NoiseModel::None => Ok(()),
            NoiseModel::AmplitudeDamping(p) | NoiseModel::CnotDepolarizing(p) => {
                if (0.0..=1.0).contains(p) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("noise parameter {p} outside [0, 1]")))
                }
            }
            NoiseModel::Custom(ch) => {
                if ch.arity() == n {
                    Ok(())
                } else {
                    Err(Error::ArityMismatch {
                        arity: ch.arity(),
                        targets: n,
                    })
                }
            }
        }
    }

    /// Depolarizing strength of the measurement channel when it has a closed form.
    ///
    /// Gate-level CNOT noise has none; callers fall back to the noise-free value.
    pub fn analytic_f(&self, n: usize) -> Option<f64> {
        match self {
            NoiseModel::None => Some(noise_free_f(n)),
            NoiseModel::AmplitudeDamping(p) => Some(f_amplitude_damping(n, *p)),
            NoiseModel::CnotDepolarizing(_) => None,
            NoiseModel::Custom(ch) => f_of_channel(ch, n).ok(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalShadow {
    pub clifford: CliffordElement,
    pub outcome: BitString,
}

impl ClassicalShadow {
    pub fn new(clifford: CliffordElement, outcome: BitString) -> Result<Self> {
        if outcome.len() != clifford.n() {
            return Err(Error::DimensionMismatch {
                expected: clifford.n(),
                found: outcome.len(),
            });
        }
        Ok(Self { clifford, outcome })
    }

    /// `U^dagger |b>`.
    pub fn state(&self) -> StabilizerState {
        StabilizerState::new(&self.clifford, self.outcome.value())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSet {
    pub n: usize,
    pub shadows: Vec<ClassicalShadow>,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl ShadowSet {
    pub fn new(n: usize, shadows: Vec<ClassicalShadow>, noise: NoiseModel, seed: u64) -> Result<Self> {
        if let Some(s) = shadows.iter().find(|s| s.clifford.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.clifford.n(),
            });
        }
        noise.validate(n)?;
        Ok(Self {
            n,
            shadows,
            noise,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.shadows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shadows.is_empty()
    }

    pub fn states(&self) -> Vec<StabilizerState> {
        self.shadows.par_iter().map(|s| s.state()).collect()
    }
}

/// Exact outcome distribution of measuring `U|target>` under `noise`.
pub fn outcome_distribution(
    target: &StateVector,
    clifford: &CliffordElement,
    noise: &NoiseModel,
) -> Result<Vec<f64>> {
    let n = target.n();
    if clifford.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: clifford.n(),
        });
    }
    noise.validate(n)?;
    let gates = decompose(clifford);
    match noise {
        NoiseModel::None | NoiseModel::AmplitudeDamping(_) => {
            let mut psi = target.clone();
            psi.apply_all(&gates)?;
            let probs = psi.probabilities();
            if let NoiseModel::AmplitudeDamping(p) = noise {
                // Damping acts on populations alone: each 1 independently decays with
                // probability 1 - p.
                Ok(damp_populations(&probs, n, *p))
            } else {
                Ok(probs)
            }
        }
        NoiseModel::CnotDepolarizing(f) => {
            let mut rho = DensityMatrix::from_pure(target);
            for g in &gates {
                rho.apply(g)?;
                if g.kind == GateKind::Cnot {
                    rho.depolarize(&g.targets, *f)?;
                }
            }
            Ok(rho.diagonal().into_iter().map(|p| p.max(0.0)).collect())
        }
        NoiseModel::Custom(ch) => {
            let mut rho = DensityMatrix::from_pure(target);
            rho.apply_all(&gates)?;
            let all: Vec<usize> = (0..n).collect();
            rho.apply_kraus(ch, &all)?;
            Ok(rho.diagonal().into_iter().map(|p| p.max(0.0)).collect())
        }
    }
}

fn damp_populations(probs: &[f64], n: usize, p: f64) -> Vec<f64> {
    let mut out = probs.to_vec();
    for bit in 0..n {
        let mask = 1usize << bit;
        for idx in 0..out.len() {
            if idx & mask != 0 {
                let moved = out[idx] * (1.0 - p);
                out[idx] -= moved;
                out[idx ^ mask] += moved;
            }
        }
    }
    out
}

/// Collects `count` shadows. Shadow `i` draws its Clifford and outcome from substreams
/// `(seed, iteration, i)`, so the result does not depend on the thread count.
pub fn collect_shadows(
    target: &StateVector,
    count: usize,
    noise: &NoiseModel,
    seed: u64,
    iteration: u64,
) -> Result<ShadowSet> {
    if count == 0 {
        return Err(Error::Empty("shadow count"));
    }
    let n = target.n();
    let cliffords: Vec<CliffordElement> = (0..count)
        .into_par_iter()
        .map(|i| sample_uniform_clifford(n, &mut substream(seed, Stream::Clifford, iteration, i as u64)))
        .collect();
    collect_with_cliffords(target, cliffords, noise, seed, iteration)
}

/// Measures `target` after each of the given Cliffords; deterministic given `seed`.
pub fn collect_with_cliffords(
    target: &StateVector,
    cliffords: Vec<CliffordElement>,
    noise: &NoiseModel,
    seed: u64,
    iteration: u64,
) -> Result<ShadowSet> {
    let n = target.n();
    noise.validate(n)?;
    let shadows = cliffords
        .into_par_iter()
        .enumerate()
        .map(|(i, c)| {
            let dist = outcome_distribution(target, &c, noise)?;
            let mut rng = substream(seed, Stream::Measurement, iteration, i as u64);
            let b = draw(&dist, &mut rng);
            ClassicalShadow::new(c, BitString::new(n, b))
        })
        .collect::<Result<Vec<_>>>()?;
    ShadowSet::new(n, shadows, noise.clone(), seed)
}

fn draw<R: Rng>(dist: &[f64], rng: &mut R) -> u64 {
    sample_index(dist.iter().copied(), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::clifford_from_index;
    use crate::quantum::Gate;
    use num_complex::Complex64 as C;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_clifford_on_zero_state_always_gives_zero() {
        let target = StateVector::zero(3);
        let ids = vec![CliffordElement::identity(3); 50];
        let set = collect_with_cliffords(&target, ids, &NoiseModel::None, 1, 0).unwrap();
        assert!(set.shadows.iter().all(|s| s.outcome.value() == 0));
    }

    #[test]
    fn damping_matches_density_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let amps = (0..8)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let target = StateVector::normalized(amps).unwrap();
        let p = 0.35;
        let c = sample_uniform_clifford(3, &mut rng);
        let fast = outcome_distribution(&target, &c, &NoiseModel::AmplitudeDamping(p)).unwrap();
        let ad = KrausChannel::amplitude_damping(p).unwrap().tensor_power(3);
        let slow = outcome_distribution(&target, &c, &NoiseModel::Custom(ad)).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cnot_noise_with_unit_strength_is_noiseless() {
        let target = crate::targets::prepare_ghz(3, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let c = sample_uniform_clifford(3, &mut rng);
            let a = outcome_distribution(&target, &c, &NoiseModel::CnotDepolarizing(1.0)).unwrap();
            let b = outcome_distribution(&target, &c, &NoiseModel::None).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cnot_noise_mixes_bell_measurement() {
        // Any entangling circuit on two qubits passes a CNOT, after which f = 0 leaves I/4.
        let bell = crate::targets::prepare_ghz(2, 0.0).unwrap();
        let c = CliffordElement::from_gates(2, &[Gate::cnot(0, 1), Gate::h(0)]).unwrap();
        let dist = outcome_distribution(&bell, &c, &NoiseModel::CnotDepolarizing(0.0)).unwrap();
        assert!(decompose(&c).iter().any(|g| g.kind == GateKind::Cnot));
        for p in dist {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn collection_is_reproducible_and_thread_independent() {
        let target = crate::targets::prepare_ghz(4, 1.0).unwrap();
        let a = collect_shadows(&target, 40, &NoiseModel::None, 9, 2).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool
            .install(|| collect_shadows(&target, 40, &NoiseModel::None, 9, 2))
            .unwrap();
        assert_eq!(a, b);
        let c = collect_shadows(&target, 40, &NoiseModel::None, 9, 3).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_noise_rejected() {
        let t = StateVector::zero(2);
        assert!(collect_shadows(&t, 1, &NoiseModel::AmplitudeDamping(1.2), 0, 0).is_err());
        assert!(collect_shadows(&t, 0, &NoiseModel::None, 0, 0).is_err());
        let wrong = NoiseModel::Custom(KrausChannel::identity(1));
        assert!(collect_shadows(&t, 1, &wrong, 0, 0).is_err());
    }

    #[test]
    fn single_qubit_snapshot_mean_reconstructs_state() {
        // Mean of 3|phi><phi| - I over shadows approaches rho.
        let target = StateVector::normalized(vec![C::new(0.6, 0.0), C::new(0.0, 0.8)]).unwrap();
        let count = 100_000;
        let set = collect_shadows(&target, count, &NoiseModel::None, 3, 0).unwrap();
        let mut mean = [C::new(0.0, 0.0); 4];
        let mut sq = [0.0f64; 4];
        for st in set.states() {
            let phi = [st.amplitude(0), st.amplitude(1)];
            for r in 0..2 {
                for c in 0..2 {
                    let id = if r == c { 1.0 } else { 0.0 };
                    let v = phi[r] * phi[c].conj() * 3.0 - id;
                    mean[2 * r + c] += v / count as f64;
                    sq[2 * r + c] += v.norm_sqr() / count as f64;
                }
            }
        }
        let a = target.amps();
        for r in 0..2 {
            for c in 0..2 {
                let exact = a[r] * a[c].conj();
                let var = sq[2 * r + c] - mean[2 * r + c].norm_sqr();
                let se = (var / count as f64).sqrt();
                assert!((mean[2 * r + c] - exact).norm() < 5.0 * se, "entry {r}{c}");
            }
        }
    }

    #[test]
    fn exhaustive_twirl_single_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let amps = vec![
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ];
        let target = StateVector::normalized(amps).unwrap();
        let mut avg = [C::new(0.0, 0.0); 4];
        for i in 0..24 {
            let c = clifford_from_index(1, i).unwrap();
            let dist = outcome_distribution(&target, &c, &NoiseModel::None).unwrap();
            for (b, p) in dist.iter().enumerate() {
                let st = StabilizerState::new(&c, b as u64);
                for r in 0..2 {
                    for col in 0..2 {
                        avg[2 * r + col] +=
                            st.amplitude(r as u64) * st.amplitude(col as u64).conj() * (p / 24.0);
                    }
                }
            }
        }
        let a = target.amps();
        for r in 0..2 {
            for col in 0..2 {
                let mixed = if r == col { 0.5 } else { 0.0 };
                let expected = a[r] * a[col].conj() / 3.0 + 2.0 / 3.0 * mixed;
                assert!((avg[2 * r + col] - expected).norm() < 1e-10);
            }
        }
    }
}
