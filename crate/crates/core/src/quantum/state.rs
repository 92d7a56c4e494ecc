use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{apply_local, check_targets, qubit_bit, Gate, Pauli, PauliBasis, PauliString, MAX_QUBITS};
use crate::{Error, Result};

type C = Complex64;

const NORM_TOLERANCE: f64 = 1e-10;

/// A normalized pure state on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n), "unsupported qubit count {n}");
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[index as usize] = C::new(1.0, 0.0);
        Self { n, amps }
    }

    /// Wraps amplitudes that must already be normalized to within 1e-10.
    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        let n = dimension_to_qubits(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<C>) -> Result<Self> {
        let n = dimension_to_qubits(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> C {
        self.amps[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C {
        assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Applies `g` in place.
    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        check_targets(&g.targets, self.n)?;
        if g.targets.len() != g.arity() {
            return Err(Error::ArityMismatch {
                arity: g.arity(),
                targets: g.targets.len(),
            });
        }
        let positions: Vec<usize> = g.targets.iter().map(|&q| qubit_bit(q, self.n)).collect();
        apply_local(&mut self.amps, &positions, &g.matrix());
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// `P|self>` for the Pauli word of `p`, ignoring its coefficient.
    pub fn pauli_image(&self, p: &PauliString) -> Result<Vec<C>> {
        self.check_len(p.n())?;
        let m = p.masks();
        let phase = C::i().powu(m.y_count);
        let mut out = vec![C::new(0.0, 0.0); self.dim()];
        for (y, &a) in self.amps.iter().enumerate() {
            let sign = if (m.z & y as u64).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            out[y ^ m.x as usize] = phase * a * sign;
        }
        Ok(out)
    }

    /// Applies `exp(-i theta P)` in place, where `P` is the Pauli word of `p`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        let image = self.pauli_image(p)?;
        let (s, c) = theta.sin_cos();
        let minus_i_sin = C::new(0.0, -s);
        for (a, pa) in self.amps.iter_mut().zip(image) {
            *a = *a * c + minus_i_sin * pa;
        }
        Ok(())
    }

    /// `<self| sum_k c_k P_k |self>`.
    pub fn expectation(&self, terms: &[PauliString]) -> Result<f64> {
        let mut total = C::new(0.0, 0.0);
        for p in terms {
            let image = self.pauli_image(p)?;
            let v: C = self.amps.iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
            total += v * p.coefficient;
        }
        if total.im.abs() > 1e-8 {
            return Err(Error::ComplexExpectation(total.im));
        }
        Ok(total.re)
    }

    /// Draws one computational-basis outcome with Born probabilities; `self` is untouched.
    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        sample_index(self.amps.iter().map(|a| a.norm_sqr()), rng)
    }

    /// Per-qubit rotation so that a Z measurement afterwards realises a measurement in `basis`.
    ///
    /// X uses `H`; Y uses `S^dagger` followed by `H`, which takes `(|0> + i|1>)/sqrt 2` to `|0>`.
    pub fn rotate_to_basis(&self, basis: &PauliBasis) -> Result<StateVector> {
        self.check_len(basis.n())?;
        let mut out = self.clone();
        for (q, &p) in basis.letters().iter().enumerate() {
            match p {
                Pauli::X => out.apply(&Gate::h(q))?,
                Pauli::Y => {
                    out.apply(&Gate::sdg(q))?;
                    out.apply(&Gate::h(q))?;
                }
                _ => {}
            }
        }
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }
}

/// `<s|R_B|t>` for a single qubit, with `R_X = H` and `R_Y = H S^dagger`.
pub(crate) fn rotation_element(p: Pauli, s: u64, t: u64) -> C {
    let sign = if s & t == 1 { -1.0 } else { 1.0 };
    match p {
        Pauli::Z | Pauli::I => {
            if s == t {
                C::new(1.0, 0.0)
            } else {
                C::new(0.0, 0.0)
            }
        }
        Pauli::X => C::new(sign * FRAC_1_SQRT_2, 0.0),
        Pauli::Y => {
            if t == 1 {
                C::new(0.0, -sign * FRAC_1_SQRT_2)
            } else {
                C::new(sign * FRAC_1_SQRT_2, 0.0)
            }
        }
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: impl Iterator<Item = f64>, rng: &mut R) -> u64 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i as u64;
        }
    }
    last as u64
}

fn dimension_to_qubits(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Format(format!(
            "amplitude count {len} is not a power of two >= 2"
        )));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!("{n} qubits exceeds {MAX_QUBITS}")));
    }
    Ok(n)
}

/// Returns `U_g |state>`.
pub fn apply_gate(state: &StateVector, g: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(g)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::GateKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: C, b: C) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(&StateVector::zero(1), &Gate::h(0)).unwrap();
        assert!(close(s.amplitude(0), C::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitude(1), C::new(FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn cnot_makes_bell_state() {
        let mut s = StateVector::zero(2);
        s.apply(&Gate::h(0)).unwrap();
        s.apply(&Gate::cnot(0, 1)).unwrap();
        assert!(close(s.amplitude(0b00), C::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitude(0b11), C::new(FRAC_1_SQRT_2, 0.0)));
        assert!(s.amplitude(0b01).norm() < 1e-15 && s.amplitude(0b10).norm() < 1e-15);
    }

    #[test]
    fn cnot_control_is_first_target() {
        // |10> -> |11> when qubit 0 (leftmost) controls.
        let s = apply_gate(&StateVector::basis(2, 0b10), &Gate::cnot(0, 1)).unwrap();
        assert!(close(s.amplitude(0b11), C::new(1.0, 0.0)));
    }

    #[test]
    fn gate_target_errors() {
        let mut s = StateVector::zero(2);
        assert!(matches!(
            s.apply(&Gate::h(2)),
            Err(Error::QubitOutOfRange { index: 2, n: 2 })
        ));
        assert!(matches!(
            s.apply(&Gate::cnot(1, 1)),
            Err(Error::DuplicateTarget(1))
        ));
    }

    #[test]
    fn random_circuits_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let mut s = StateVector::zero(3);
            for _ in 0..20 {
                let q = rng.gen_range(0..3);
                let r = (q + rng.gen_range(1..3)) % 3;
                let theta = rng.gen_range(-PI..PI);
                let g = match rng.gen_range(0..8) {
                    0 => Gate::h(q),
                    1 => Gate::s(q),
                    2 => Gate::cnot(q, r),
                    3 => Gate::new(GateKind::Rx(theta), vec![q]),
                    4 => Gate::new(GateKind::Ry(theta), vec![q]),
                    5 => Gate::new(GateKind::Rz(theta), vec![q]),
                    6 => Gate::new(GateKind::Rzz(theta), vec![q, r]),
                    _ => Gate::new(GateKind::Y, vec![q]),
                };
                s.apply(&g).unwrap();
            }
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_measurement_frequencies() {
        let mut amps = vec![C::new(0.0, 0.0); 64];
        amps[0] = C::new(FRAC_1_SQRT_2, 0.0);
        amps[63] = C::new(FRAC_1_SQRT_2, 0.0);
        let s = StateVector::from_amplitudes(amps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shots = 10_000;
        let mut zeros = 0;
        for _ in 0..shots {
            match s.measure_all(&mut rng) {
                0 => zeros += 1,
                63 => {}
                other => panic!("impossible outcome {other}"),
            }
        }
        let freq = zeros as f64 / shots as f64;
        let sigma = (0.25 / shots as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma, "{freq}");
    }

    #[test]
    fn y_eigenstate_measures_evenly_in_z_and_deterministically_in_y() {
        let plus_i = StateVector::from_amplitudes(vec![
            C::new(FRAC_1_SQRT_2, 0.0),
            C::new(0.0, FRAC_1_SQRT_2),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shots = 10_000;
        let ones: u64 = (0..shots).map(|_| plus_i.measure_all(&mut rng)).sum();
        let freq = ones as f64 / shots as f64;
        assert!((freq - 0.5).abs() < 3.0 * (0.25 / shots as f64).sqrt());

        let rotated = plus_i.rotate_to_basis(&"Y".parse().unwrap()).unwrap();
        assert!((rotated.probabilities()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_basis_probabilities() {
        let zero = StateVector::zero(1);
        let p = zero.rotate_to_basis(&"X".parse().unwrap()).unwrap().probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        let plus = apply_gate(&zero, &Gate::h(0)).unwrap();
        let p = plus.rotate_to_basis(&"X".parse().unwrap()).unwrap().probabilities();
        assert!((p[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn six_eigenstates_in_three_bases() {
        let h = FRAC_1_SQRT_2;
        // (state, eigen-basis letter, outcome for +1 eigenvalue)
        let states: [(Vec<C>, char, usize); 6] = [
            (vec![C::new(1.0, 0.0), C::new(0.0, 0.0)], 'Z', 0),
            (vec![C::new(0.0, 0.0), C::new(1.0, 0.0)], 'Z', 1),
            (vec![C::new(h, 0.0), C::new(h, 0.0)], 'X', 0),
            (vec![C::new(h, 0.0), C::new(-h, 0.0)], 'X', 1),
            (vec![C::new(h, 0.0), C::new(0.0, h)], 'Y', 0),
            (vec![C::new(h, 0.0), C::new(0.0, -h)], 'Y', 1),
        ];
        for (amps, eig, outcome) in states {
            let s = StateVector::from_amplitudes(amps).unwrap();
            for b in ['X', 'Y', 'Z'] {
                let p = s
                    .rotate_to_basis(&b.to_string().parse().unwrap())
                    .unwrap()
                    .probabilities();
                let expected = if b == eig {
                    let mut e = [0.0, 0.0];
                    e[outcome] = 1.0;
                    e
                } else {
                    [0.5, 0.5]
                };
                assert!((p[0] - expected[0]).abs() < 1e-12, "{eig}{outcome} in {b}");
                assert!((p[1] - expected[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_element_matches_dense_rotation() {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let basis = PauliBasis::new(vec![p]).unwrap();
            for t in 0..2u64 {
                let rotated = StateVector::basis(1, t).rotate_to_basis(&basis).unwrap();
                for s in 0..2u64 {
                    assert!(close(rotated.amplitude(s), rotation_element(p, s, t)));
                }
            }
        }
    }

    #[test]
    fn expectation_values() {
        let zero = StateVector::zero(6);
        let z1 = PauliString::parse(1.0, "ZIIIII").unwrap();
        assert!((zero.expectation(&[z1]).unwrap() - 1.0).abs() < 1e-15);

        let mut amps = vec![C::new(0.0, 0.0); 64];
        amps[0] = C::new(FRAC_1_SQRT_2, 0.0);
        amps[63] = C::new(FRAC_1_SQRT_2, 0.0);
        let ghz = StateVector::from_amplitudes(amps).unwrap();
        let xs = PauliString::parse(1.0, "XXXXXX").unwrap();
        assert!((ghz.expectation(&[xs]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_rotation_matches_rz() {
        let mut a = apply_gate(&StateVector::zero(1), &Gate::h(0)).unwrap();
        let mut b = a.clone();
        a.apply_pauli_rotation(&PauliString::parse(1.0, "Z").unwrap(), 0.4)
            .unwrap();
        b.apply(&Gate::new(GateKind::Rz(0.8), vec![0])).unwrap();
        assert!((a.fidelity(&b) - 1.0).abs() < 1e-12);
        assert!(close(a.amplitude(0), b.amplitude(0)));
    }
}
