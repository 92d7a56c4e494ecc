use num_complex::Complex64;

use super::{CliffordElement, PauliOp};
use crate::quantum::{bit_of, AmplitudeOracle, BitString};
use crate::{Error, Result};

type C = Complex64;

/// `U^dagger |b>` in a canonical amplitude form.
///
/// The support is the affine space `min_string + span(X parts of the pivot generators)`, all
/// amplitudes have modulus `2^(-k/2)`, and the amplitude at `min_string` (the smallest index
/// in the support) is pinned to be positive real. Any other amplitude follows from the
/// stabilizer that maps `min_string` to it.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerState {
    n: usize,
    min_string: u64,
    /// Stabilizer generators in reduced echelon form on their X parts, ordered by decreasing
    /// leading bit; each entry stores the leading-bit mask.
    pivots: Vec<(u64, PauliOp)>,
    modulus: f64,
}

impl StabilizerState {
    pub fn new(c: &CliffordElement, b: u64) -> Self {
        let n = c.n();
        let v = c.inverse();
        let mut rows: Vec<PauliOp> = (0..n)
            .map(|j| {
                let row = v.row(2 * j + 1);
                if bit_of(b, j, n) == 1 {
                    row.mul(PauliOp { phase: 2, x: 0, z: 0 })
                } else {
                    row
                }
            })
            .collect();

        let mut pivots: Vec<(u64, PauliOp)> = Vec::new();
        let mut used = vec![false; n];
        for bit in (0..n).rev() {
            let mask = 1u64 << bit;
            let Some(p) = (0..n).find(|&i| !used[i] && rows[i].x & mask != 0) else {
                continue;
            };
            used[p] = true;
            let pivot = rows[p];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != p && row.x & mask != 0 {
                    *row = row.mul(pivot);
                }
            }
            for (_, g) in pivots.iter_mut() {
                if g.x & mask != 0 {
                    *g = g.mul(pivot);
                }
            }
            pivots.push((mask, pivot));
        }

        // Remaining generators are signed Z strings; each fixes one parity of the support.
        let mut constraints: Vec<(u64, u64)> = rows
            .iter()
            .zip(&used)
            .filter(|(_, &u)| !u)
            .map(|(r, _)| (r.z, (r.phase / 2) as u64))
            .collect();
        let mut solved: Vec<(u64, u64, u64)> = Vec::new();
        for bit in (0..n).rev() {
            let mask = 1u64 << bit;
            let Some(p) = constraints.iter().position(|c| c.0 & mask != 0) else {
                continue;
            };
            let (pz, pr) = constraints.swap_remove(p);
            for c in constraints.iter_mut() {
                if c.0 & mask != 0 {
                    c.0 ^= pz;
                    c.1 ^= pr;
                }
            }
            for s in solved.iter_mut() {
                if s.0 & mask != 0 {
                    s.0 ^= pz;
                    s.1 ^= pr;
                }
            }
            solved.push((pz, pr, mask));
        }
        debug_assert!(constraints.is_empty());
        let mut x0 = solved
            .iter()
            .filter(|s| s.1 == 1)
            .fold(0u64, |acc, s| acc | s.2);
        for &(mask, g) in &pivots {
            if x0 & mask != 0 {
                x0 ^= g.x;
            }
        }
        let k = pivots.len();
        Self {
            n,
            min_string: x0,
            pivots,
            modulus: 0.5f64.powf(k as f64 / 2.0),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of qubits' worth of superposition: the support has `2^rank` strings.
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn min_string(&self) -> u64 {
        self.min_string
    }

    /// `<s|phi>` in `O(n)` word operations.
    pub fn amplitude(&self, s: u64) -> C {
        let mut d = s ^ self.min_string;
        let mut acc = PauliOp::identity();
        for &(mask, g) in &self.pivots {
            if d & mask != 0 {
                d ^= g.x;
                acc = acc.mul(g);
            }
        }
        if d != 0 {
            return C::new(0.0, 0.0);
        }
        let sign = (acc.z & self.min_string).count_ones() % 2;
        let quarter = (acc.phase as u32 + 2 * sign) % 4;
        let m = self.modulus;
        match quarter {
            0 => C::new(m, 0.0),
            1 => C::new(0.0, m),
            2 => C::new(-m, 0.0),
            _ => C::new(0.0, -m),
        }
    }

    /// Every support string with its amplitude.
    pub fn support(&self) -> Vec<(u64, C)> {
        let k = self.pivots.len();
        (0..1u64 << k)
            .map(|sel| {
                let s = self
                    .pivots
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (sel >> i) & 1 == 1)
                    .fold(self.min_string, |acc, (_, (_, g))| acc ^ g.x);
                (s, self.amplitude(s))
            })
            .collect()
    }

    /// `<self|psi>`, summing over the support only.
    pub fn overlap<A: AmplitudeOracle + ?Sized>(&self, psi: &A) -> Result<C> {
        if psi.qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: psi.qubits(),
            });
        }
        Ok(self
            .support()
            .into_iter()
            .map(|(s, a)| a.conj() * psi.query(s))
            .sum())
    }
}

impl AmplitudeOracle for StabilizerState {
    fn qubits(&self) -> usize {
        self.n
    }

    fn query(&self, s: u64) -> C {
        self.amplitude(s)
    }
}

pub fn stabilizer_state(c: &CliffordElement, b: &BitString) -> Result<StabilizerState> {
    if b.len() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: c.n(),
            found: b.len(),
        });
    }
    Ok(StabilizerState::new(c, b.value()))
}

/// `<s|U^dagger|b>` with the global phase pinned as in [`StabilizerState`].
pub fn amplitude(c: &CliffordElement, b: &BitString, s: &BitString) -> Result<C> {
    if s.len() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: c.n(),
            found: s.len(),
        });
    }
    Ok(stabilizer_state(c, b)?.amplitude(s.value()))
}

#[cfg(test)]
mod tests {
    use super::super::tests::dense_columns;
    use super::super::{clifford_from_index, decompose, sample_uniform_clifford};
    use super::*;
    use crate::quantum::Gate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    /// `U^dagger|b>` from the dense circuit, phase pinned at the first nonzero entry.
    fn dense_phi(c: &CliffordElement, b: u64) -> Vec<C> {
        let n = c.n();
        let cols = dense_columns(n, &decompose(c));
        let mut phi: Vec<C> = (0..1usize << n).map(|s| cols[s].amps()[b as usize].conj()).collect();
        let first = *phi.iter().find(|a| a.norm() > 1e-9).unwrap();
        let fix = first.conj() / first.norm();
        phi.iter_mut().for_each(|a| *a *= fix);
        phi
    }

    #[test]
    fn identity_gives_basis_state() {
        for n in 1..=4 {
            let id = CliffordElement::identity(n);
            for b in 0..1u64 << n {
                let st = StabilizerState::new(&id, b);
                for s in 0..1u64 << n {
                    let expected = if s == b { 1.0 } else { 0.0 };
                    assert!((st.amplitude(s) - expected).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn hadamard_amplitudes() {
        let h = CliffordElement::from_gates(1, &[Gate::h(0)]).unwrap();
        let zero = BitString::new(1, 0);
        for s in 0..2 {
            let a = amplitude(&h, &zero, &BitString::new(1, s)).unwrap();
            assert!((a - FRAC_1_SQRT_2).norm() < 1e-15);
        }
        let one = BitString::new(1, 1);
        let a = amplitude(&h, &one, &BitString::new(1, 1)).unwrap();
        assert!((a + FRAC_1_SQRT_2).norm() < 1e-15);
        assert!(amplitude(&h, &BitString::new(2, 0), &zero).is_err());
    }

    #[test]
    fn matches_dense_oracle_with_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..1000 {
            let n = 1 + trial % 5;
            let c = sample_uniform_clifford(n, &mut rng);
            let b = rng.gen_range(0..1u64 << n);
            let st = StabilizerState::new(&c, b);
            let phi = dense_phi(&c, b);
            let s = rng.gen_range(0..1u64 << n);
            assert!((st.amplitude(s) - phi[s as usize]).norm() < 1e-8, "trial {trial}");
        }
    }

    #[test]
    fn full_state_matches_dense_for_small_registers() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in 1..=4 {
            for _ in 0..30 {
                let c = sample_uniform_clifford(n, &mut rng);
                let b = rng.gen_range(0..1u64 << n);
                let st = StabilizerState::new(&c, b);
                let phi = dense_phi(&c, b);
                for s in 0..1u64 << n {
                    assert!((st.amplitude(s) - phi[s as usize]).norm() < 1e-10);
                }
                let support = st.support();
                assert_eq!(support.len(), 1 << st.rank());
                assert_eq!(support.iter().map(|p| p.0).min(), Some(st.min_string()));
            }
        }
    }

    #[test]
    fn exhaustive_two_qubit_normalization() {
        for i in 0..11_520 {
            let c = clifford_from_index(2, i).unwrap();
            for b in 0..4 {
                let st = StabilizerState::new(&c, b);
                let norm: f64 = (0..4).map(|s| st.amplitude(s).norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn independent_of_construction_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let a = sample_uniform_clifford(4, &mut rng);
            let b = sample_uniform_clifford(4, &mut rng);
            let direct = a.then(&b).unwrap();
            let gates: Vec<Gate> = decompose(&a).into_iter().chain(decompose(&b)).collect();
            let replayed = CliffordElement::from_gates(4, &gates).unwrap();
            let s1 = StabilizerState::new(&direct, 5);
            let s2 = StabilizerState::new(&replayed, 5);
            for s in 0..16 {
                assert!((s1.amplitude(s) - s2.amplitude(s)).norm() < 1e-14);
            }
        }
    }
}
