use num_complex::Complex64;
use rand::Rng;

use super::state::sample_index;
use super::{apply_local, check_targets, qubit_bit, Gate, KrausChannel, StateVector};
use crate::{Error, Result};

type C = Complex64;

/// A density matrix stored row-major; entry `(r, c)` lives at `r * 2^n + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    entries: Vec<C>,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amps();
        let dim = amps.len();
        let mut entries = vec![C::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[r * dim + c] = amps[r] * amps[c].conj();
            }
        }
        Self {
            n: state.n(),
            entries,
        }
    }

    /// Wraps a row-major matrix after checking Hermiticity and unit trace to 1e-10.
    pub fn from_entries(n: usize, entries: Vec<C>) -> Result<Self> {
        let dim = 1usize << n;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let dm = Self { n, entries };
        if dm.hermiticity_error() > 1e-10 {
            return Err(Error::Format("density matrix is not Hermitian".into()));
        }
        if (dm.trace().re - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(dm.trace().re));
        }
        Ok(dm)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        let mut entries = vec![C::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C::new(1.0 / dim as f64, 0.0);
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[C] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> C {
        self.entries[r * self.dim() + c]
    }

    pub fn trace(&self) -> C {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `<psi| rho |psi>`.
    pub fn expectation_pure(&self, psi: &StateVector) -> f64 {
        let d = self.dim();
        let a = psi.amps();
        let mut v = C::new(0.0, 0.0);
        for r in 0..d {
            let row: C = (0..d).map(|c| self.entries[r * d + c] * a[c]).sum();
            v += a[r].conj() * row;
        }
        v.re
    }

    fn row_positions(&self, targets: &[usize]) -> Vec<usize> {
        targets
            .iter()
            .map(|&q| self.n + qubit_bit(q, self.n))
            .collect()
    }

    fn col_positions(&self, targets: &[usize]) -> Vec<usize> {
        targets.iter().map(|&q| qubit_bit(q, self.n)).collect()
    }

    /// `rho -> U rho U^dagger`.
    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        check_targets(&g.targets, self.n)?;
        if g.targets.len() != g.arity() {
            return Err(Error::ArityMismatch {
                arity: g.arity(),
                targets: g.targets.len(),
            });
        }
        let m = g.matrix();
        let conj: Vec<C> = m.iter().map(|v| v.conj()).collect();
        let (rows, cols) = (self.row_positions(&g.targets), self.col_positions(&g.targets));
        apply_local(&mut self.entries, &rows, &m);
        apply_local(&mut self.entries, &cols, &conj);
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// `rho -> sum_k K_k rho K_k^dagger` with the channel acting on `targets`.
    pub fn apply_kraus(&mut self, ch: &KrausChannel, targets: &[usize]) -> Result<()> {
        if ch.arity() != targets.len() {
            return Err(Error::ArityMismatch {
                arity: ch.arity(),
                targets: targets.len(),
            });
        }
        check_targets(targets, self.n)?;
        let rows = self.row_positions(targets);
        let cols = self.col_positions(targets);
        let ops = ch.operators();
        if ops.len() == 1 {
            let conj: Vec<C> = ops[0].iter().map(|v| v.conj()).collect();
            apply_local(&mut self.entries, &rows, &ops[0]);
            apply_local(&mut self.entries, &cols, &conj);
            return Ok(());
        }
        let mut total = vec![C::new(0.0, 0.0); self.entries.len()];
        for k in ops {
            let conj: Vec<C> = k.iter().map(|v| v.conj()).collect();
            let mut term = self.entries.clone();
            apply_local(&mut term, &rows, k);
            apply_local(&mut term, &cols, &conj);
            total.iter_mut().zip(term).for_each(|(t, v)| *t += v);
        }
        self.entries = total;
        Ok(())
    }

    /// `rho -> f rho + (1 - f) Tr_targets(rho) (x) I / 2^k` without expanding Kraus operators.
    pub fn depolarize(&mut self, targets: &[usize], f: f64) -> Result<()> {
        check_targets(targets, self.n)?;
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameter(format!("depolarizing f = {f} outside [0, 1]")));
        }
        let d = self.dim();
        let mask: usize = targets.iter().map(|&q| 1usize << qubit_bit(q, self.n)).sum();
        let subsets: Vec<usize> = (0..d).filter(|a| a & !mask == 0).collect();
        let k = subsets.len() as f64;
        let old = std::mem::take(&mut self.entries);
        let mut out: Vec<C> = old.iter().map(|v| v * f).collect();
        for r in 0..d {
            if r & mask != 0 {
                continue;
            }
            for c in 0..d {
                if c & mask != 0 {
                    continue;
                }
                let traced: C = subsets.iter().map(|&a| old[(r | a) * d + (c | a)]).sum();
                let add = traced * ((1.0 - f) / k);
                for &a in &subsets {
                    out[(r | a) * d + (c | a)] += add;
                }
            }
        }
        self.entries = out;
        Ok(())
    }

    /// Draws one outcome from the diagonal; `self` is untouched.
    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        sample_index(self.diagonal().into_iter().map(|p| p.max(0.0)), rng)
    }
}

/// Returns `sum_k K_k rho K_k^dagger`.
pub fn apply_kraus(dm: &DensityMatrix, ch: &KrausChannel, targets: &[usize]) -> Result<DensityMatrix> {
    let mut out = dm.clone();
    out.apply_kraus(ch, targets)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let amps = (0..1 << n)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        StateVector::normalized(amps).unwrap()
    }

    fn assert_valid(dm: &DensityMatrix) {
        assert!(dm.hermiticity_error() < 1e-10);
        assert!((dm.trace() - 1.0).norm() < 1e-10);
        // Gershgorin-free check: every principal 1x1 minor and <v|rho|v> for basis vectors.
        assert!(dm.diagonal().iter().all(|&p| p > -1e-9));
    }

    #[test]
    fn amplitude_damping_on_excited_state() {
        let p = 0.3;
        let one = DensityMatrix::from_pure(&StateVector::basis(1, 1));
        let out = apply_kraus(&one, &KrausChannel::amplitude_damping(p).unwrap(), &[0]).unwrap();
        assert!((out.get(0, 0).re - (1.0 - p)).abs() < 1e-15);
        assert!((out.get(1, 1).re - p).abs() < 1e-15);
        assert!(out.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn ground_state_is_fixed_by_damping() {
        let zero = DensityMatrix::from_pure(&StateVector::zero(1));
        for p in [0.0, 0.25, 0.5, 1.0] {
            let out =
                apply_kraus(&zero, &KrausChannel::amplitude_damping(p).unwrap(), &[0]).unwrap();
            assert_eq!(out, zero);
        }
    }

    #[test]
    fn damping_matches_matrix_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::from_pure(&random_state(1, &mut rng));
        let p: f64 = 0.37;
        let out = apply_kraus(&rho, &KrausChannel::amplitude_damping(p).unwrap(), &[0]).unwrap();
        assert!((out.get(0, 0) - (rho.get(0, 0) + rho.get(1, 1) * (1.0 - p))).norm() < 1e-14);
        assert!((out.get(0, 1) - rho.get(0, 1) * p.sqrt()).norm() < 1e-14);
        assert!((out.get(1, 1) - rho.get(1, 1) * p).norm() < 1e-14);
    }

    #[test]
    fn two_qubit_depolarizing_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for f in [0.0, 0.4, 0.9, 1.0] {
            let ch = KrausChannel::depolarizing(2, f).unwrap();
            let rho = DensityMatrix::from_pure(&random_state(2, &mut rng));
            let out = apply_kraus(&rho, &ch, &[0, 1]).unwrap();
            for r in 0..4 {
                for c in 0..4 {
                    let mixed = if r == c { 0.25 } else { 0.0 };
                    let expected = rho.get(r, c) * f + (1.0 - f) * mixed;
                    assert!((out.get(r, c) - expected).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn depolarizing_on_subsystem_keeps_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut rho = DensityMatrix::from_pure(&random_state(4, &mut rng));
        rho.apply(&Gate::cnot(3, 1)).unwrap();
        rho.apply_kraus(&KrausChannel::depolarizing(2, 0.8).unwrap(), &[3, 1])
            .unwrap();
        rho.apply_kraus(&KrausChannel::amplitude_damping(0.6).unwrap(), &[2])
            .unwrap();
        assert_valid(&rho);
    }

    #[test]
    fn direct_depolarizing_matches_kraus_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for f in [0.0, 0.3, 0.95] {
            let rho = DensityMatrix::from_pure(&random_state(4, &mut rng));
            let by_kraus = apply_kraus(&rho, &KrausChannel::depolarizing(2, f).unwrap(), &[2, 0]).unwrap();
            let mut direct = rho.clone();
            direct.depolarize(&[2, 0], f).unwrap();
            for (a, b) in direct.entries().iter().zip(by_kraus.entries()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_channel_is_exact_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = DensityMatrix::from_pure(&random_state(3, &mut rng));
        let out = apply_kraus(&rho, &KrausChannel::identity(2), &[2, 0]).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let rho = DensityMatrix::from_pure(&StateVector::zero(2));
        assert!(matches!(
            apply_kraus(&rho, &KrausChannel::identity(2), &[0]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn gate_on_density_matches_pure_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let psi = random_state(3, &mut rng);
        let mut rho = DensityMatrix::from_pure(&psi);
        let gates = [Gate::h(1), Gate::cnot(1, 2), Gate::s(0), Gate::cnot(2, 0)];
        let mut evolved = psi.clone();
        for g in &gates {
            rho.apply(g).unwrap();
            evolved.apply(g).unwrap();
        }
        let expected = DensityMatrix::from_pure(&evolved);
        for (a, b) in rho.entries().iter().zip(expected.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
