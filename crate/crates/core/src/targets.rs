//! Target states: Trotter-evolved lattice models and the phase-shifted GHZ state.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::quantum::{Pauli, PauliBasis, PauliString, StateVector};
use crate::{Error, Result};

type C = Complex64;

/// Mass parameter of the SU(3) unit-cell model.
pub const QCD_MASS: f64 = 1.2;
/// Inverse squared coupling of the SU(3) unit-cell model.
pub const QCD_X: f64 = 0.8;
pub const QCD_TIME: f64 = 1.8;
pub const QCD_STEPS: usize = 2;
/// `|ddd uuu>` with up = 0, down = 1.
pub const QCD_INITIAL: u64 = 0b111000;

pub const AFH_QUBITS: usize = 6;
pub const AFH_TIME: f64 = 0.8;
pub const AFH_STEPS: usize = 4;
/// `|udu dud>` with up = 0, down = 1.
pub const AFH_INITIAL: u64 = 0b010101;

/// A Hermitian operator as an ordered list of real-coefficient Pauli strings.
///
/// The order of `terms` is the order used by Trotterization.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<PauliString>,
}

impl Hamiltonian {
    pub fn new(n: usize, terms: Vec<PauliString>) -> Result<Self> {
        for t in &terms {
            if t.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.n(),
                });
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite coefficient in {t}")));
            }
        }
        Ok(Self { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        state.expectation(&self.terms)
    }
}

/// Single-qubit factor of a ladder-operator product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ladder {
    Plus,
    Minus,
    Z,
}

impl Ladder {
    /// `sigma^+- = (X +- iY)/2` as (Pauli, weight) pairs.
    fn expand(self) -> Vec<(Pauli, C)> {
        match self {
            Ladder::Plus => vec![(Pauli::X, C::new(0.5, 0.0)), (Pauli::Y, C::new(0.0, 0.5))],
            Ladder::Minus => vec![(Pauli::X, C::new(0.5, 0.0)), (Pauli::Y, C::new(0.0, -0.5))],
            Ladder::Z => vec![(Pauli::Z, C::new(1.0, 0.0))],
        }
    }

    fn dagger(self) -> Self {
        match self {
            Ladder::Plus => Ladder::Minus,
            Ladder::Minus => Ladder::Plus,
            Ladder::Z => Ladder::Z,
        }
    }
}

/// Expands `coefficient * prod(factors) + h.c.` into real Pauli strings in first-seen order.
fn expand_with_conjugate(n: usize, coefficient: f64, factors: &[(usize, Ladder)]) -> Vec<PauliString> {
    let mut order: Vec<Vec<Pauli>> = Vec::new();
    let mut sums: BTreeMap<Vec<u8>, C> = BTreeMap::new();
    let key = |w: &[Pauli]| w.iter().map(|&p| p as u8).collect::<Vec<u8>>();
    for conjugate in [false, true] {
        let mut words: Vec<(Vec<Pauli>, C)> = vec![(vec![Pauli::I; n], C::new(coefficient, 0.0))];
        for &(q, op) in factors {
            let op = if conjugate { op.dagger() } else { op };
            let mut next = Vec::new();
            for (word, w) in &words {
                for (p, pw) in op.expand() {
                    let mut word = word.clone();
                    word[q] = p;
                    next.push((word, w * pw));
                }
            }
            words = next;
        }
        for (word, w) in words {
            let k = key(&word);
            if !sums.contains_key(&k) {
                order.push(word.clone());
            }
            *sums.entry(k).or_insert(C::new(0.0, 0.0)) += w;
        }
    }
    order
        .into_iter()
        .filter_map(|word| {
            let v = sums[&key(&word)];
            debug_assert!(v.im.abs() < 1e-14);
            (v.re.abs() > 1e-14).then(|| PauliString::new(v.re, word))
        })
        .collect()
}

/// Kinetic (hopping) part of the SU(3) unit cell on 6 qubits.
pub fn qcd_kinetic() -> Hamiltonian {
    let n = 6;
    let hops = [(0usize, 1.0), (1, -1.0), (2, 1.0)];
    let mut terms = Vec::new();
    for (a, sign) in hops {
        let factors = [
            (a, Ladder::Plus),
            (a + 1, Ladder::Z),
            (a + 2, Ladder::Z),
            (a + 3, Ladder::Minus),
        ];
        terms.extend(expand_with_conjugate(n, -0.5 * sign, &factors));
    }
    Hamiltonian { n, terms }
}

/// `H = H_kin + mass H_m + H_e / (2x)` for a single SU(3) unit cell (6 qubits).
///
/// Term order: hopping terms left to right, then mass terms, then electric terms. Terms
/// with zero coefficient (e.g. `x = inf`) are dropped.
pub fn build_qcd_hamiltonian(mass: f64, x: f64) -> Result<Hamiltonian> {
    if x == 0.0 || x.is_nan() {
        return Err(Error::InvalidParameter("x must be nonzero".into()));
    }
    let n = 6;
    let mut terms = qcd_kinetic().terms;
    let z = |q: usize| (q, Pauli::Z);

    let mut mass_terms = vec![PauliString::identity(3.0 * mass, n)];
    for q in 0..3 {
        mass_terms.push(PauliString::local(-0.5 * mass, n, &[z(q)]));
    }
    for q in 3..6 {
        mass_terms.push(PauliString::local(0.5 * mass, n, &[z(q)]));
    }

    let e = 1.0 / (2.0 * x);
    let electric_terms = vec![
        PauliString::identity(e, n),
        PauliString::local(-e / 3.0, n, &[z(0), z(1)]),
        PauliString::local(-e / 3.0, n, &[z(0), z(2)]),
        PauliString::local(-e / 3.0, n, &[z(1), z(2)]),
    ];
    terms.extend(mass_terms);
    terms.extend(electric_terms);
    terms.retain(|t| t.coefficient != 0.0);
    Hamiltonian::new(n, terms)
}

/// Open-boundary Heisenberg chain `sum_i X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}`.
pub fn build_afh_hamiltonian(n: usize) -> Result<Hamiltonian> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("AFH chain needs n >= 2, got {n}")));
    }
    let mut terms = Vec::with_capacity(3 * (n - 1));
    for i in 0..n - 1 {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            terms.push(PauliString::local(1.0, n, &[(i, p), (i + 1, p)]));
        }
    }
    Hamiltonian::new(n, terms)
}

/// First-order product formula `(prod_k exp(-i c_k P_k t / steps))^steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrotterPlan {
    pub hamiltonian: Hamiltonian,
    pub total_time: f64,
    pub steps: usize,
}

impl TrotterPlan {
    pub fn new(hamiltonian: Hamiltonian, total_time: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("Trotter steps must be >= 1".into()));
        }
        if !total_time.is_finite() {
            return Err(Error::InvalidParameter("Trotter time must be finite".into()));
        }
        Ok(Self {
            hamiltonian,
            total_time,
            steps,
        })
    }
}

pub fn trotter_evolve(initial: &StateVector, plan: &TrotterPlan) -> Result<StateVector> {
    if plan.hamiltonian.n() != initial.n() {
        return Err(Error::DimensionMismatch {
            expected: initial.n(),
            found: plan.hamiltonian.n(),
        });
    }
    let dt = plan.total_time / plan.steps as f64;
    let mut state = initial.clone();
    for _ in 0..plan.steps {
        for term in plan.hamiltonian.terms() {
            state.apply_pauli_rotation(term, term.coefficient * dt)?;
        }
    }
    Ok(state)
}

pub fn qcd_plan() -> TrotterPlan {
    let h = build_qcd_hamiltonian(QCD_MASS, QCD_X).expect("fixed parameters are valid");
    TrotterPlan::new(h, QCD_TIME, QCD_STEPS).expect("fixed plan is valid")
}

pub fn afh_plan() -> TrotterPlan {
    let h = build_afh_hamiltonian(AFH_QUBITS).expect("fixed parameters are valid");
    TrotterPlan::new(h, AFH_TIME, AFH_STEPS).expect("fixed plan is valid")
}

/// The SU(3) unit cell evolved from the baryon-antibaryon state.
pub fn prepare_qcd_state() -> StateVector {
    trotter_evolve(&StateVector::basis(6, QCD_INITIAL), &qcd_plan()).expect("dimensions agree")
}

/// The Heisenberg chain evolved from the Neel state.
pub fn prepare_afh_state() -> StateVector {
    trotter_evolve(&StateVector::basis(AFH_QUBITS, AFH_INITIAL), &afh_plan())
        .expect("dimensions agree")
}

/// `(|0...0> + e^{i theta} |1...1>) / sqrt 2`.
pub fn prepare_ghz(n: usize, theta: f64) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("GHZ needs n >= 2, got {n}")));
    }
    let mut amps = vec![C::new(0.0, 0.0); 1 << n];
    amps[0] = C::new(FRAC_1_SQRT_2, 0.0);
    amps[(1 << n) - 1] = C::from_polar(FRAC_1_SQRT_2, theta);
    StateVector::from_amplitudes(amps)
}

/// The all-Z basis followed by `{X,Y}^2` on every adjacent pair (Z elsewhere): `4n - 3` bases.
pub fn nnqst_basis_set(n: usize) -> Result<Vec<PauliBasis>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("basis set needs n >= 2, got {n}")));
    }
    let mut out = vec![PauliBasis::all_z(n)];
    for i in 0..n - 1 {
        for a in [Pauli::X, Pauli::Y] {
            for b in [Pauli::X, Pauli::Y] {
                let mut letters = vec![Pauli::Z; n];
                letters[i] = a;
                letters[i + 1] = b;
                out.push(PauliBasis::new(letters)?);
            }
        }
    }
    Ok(out)
}

/// Per-site `<S^x_j> = <X_j>/2`, no staggering sign applied.
pub fn staggered_sx_profile(state: &StateVector) -> Vec<f64> {
    let n = state.n();
    (0..n)
        .map(|j| {
            state
                .expectation(&[PauliString::local(0.5, n, &[(j, Pauli::X)])])
                .expect("single-site operator matches register")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;
    use std::f64::consts::PI;

    #[test]
    fn qcd_coefficients() {
        let h = build_qcd_hamiltonian(1.2, 0.8).unwrap();
        let find = |w: &str| {
            h.terms()
                .iter()
                .filter(|t| t.word() == w)
                .map(|t| t.coefficient)
                .collect::<Vec<_>>()
        };
        assert_eq!(find("ZIIIII"), vec![-0.6]);
        assert_eq!(find("IIIIIZ"), vec![0.6]);
        // Identity: 3 * mass from H_m and 1/(2x) from H_e.
        let id: Vec<f64> = find("IIIIII");
        assert_eq!(id.len(), 2);
        assert!((id[0] - 3.6).abs() < 1e-15 && (id[1] - 0.625).abs() < 1e-15);
        assert!((find("ZZIIII")[0] + 0.625 / 3.0).abs() < 1e-15);
        // Hopping: -1/2 (s+ Z Z s- + h.c.) = -1/4 (XZZX + YZZY).
        assert_eq!(find("XZZXII"), vec![-0.25]);
        assert_eq!(find("YZZYII"), vec![-0.25]);
        assert_eq!(find("IXZZXI"), vec![0.25]);
        assert_eq!(find("IIYZZY"), vec![-0.25]);
        assert_eq!(h.terms().len(), 6 + 7 + 4);
    }

    #[test]
    fn qcd_term_order_is_kinetic_mass_electric() {
        let h = build_qcd_hamiltonian(1.2, 0.8).unwrap();
        let words: Vec<String> = h.terms().iter().map(|t| t.word()).collect();
        assert_eq!(words[0], "XZZXII");
        assert_eq!(words[1], "YZZYII");
        assert_eq!(words[5], "IIYZZY");
        assert_eq!(words[6], "IIIIII");
        assert_eq!(words[13], "IIIIII");
        assert_eq!(words[16], "IZZIII");
    }

    #[test]
    fn qcd_infinite_coupling_keeps_only_hopping() {
        let h = build_qcd_hamiltonian(0.0, f64::INFINITY).unwrap();
        assert_eq!(h.terms(), qcd_kinetic().terms());
        assert!(build_qcd_hamiltonian(1.0, 0.0).is_err());
    }

    #[test]
    fn ladder_expansion_matches_dense_operator() {
        // s+ on qubit 0 times s- on qubit 1 plus h.c. equals (XX + YY)/2 on the 2-qubit space.
        let terms = expand_with_conjugate(2, 1.0, &[(0, Ladder::Plus), (1, Ladder::Minus)]);
        let words: Vec<(String, f64)> = terms.iter().map(|t| (t.word(), t.coefficient)).collect();
        assert_eq!(words, vec![("XX".into(), 0.5), ("YY".into(), 0.5)]);
        // |01> -> |10> with amplitude 1 under s+_0 s-_1 (s+ = |0><1|).
        let psi = StateVector::basis(2, 0b10);
        let image = {
            let mut acc = vec![C::new(0.0, 0.0); 4];
            for t in &terms {
                for (a, v) in acc.iter_mut().zip(psi.pauli_image(t).unwrap()) {
                    *a += v * t.coefficient;
                }
            }
            acc
        };
        assert!((image[0b01] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn afh_term_counts() {
        let h2 = build_afh_hamiltonian(2).unwrap();
        let words: Vec<String> = h2.terms().iter().map(|t| t.word()).collect();
        assert_eq!(words, vec!["XX", "YY", "ZZ"]);
        assert!(h2.terms().iter().all(|t| t.coefficient == 1.0));
        assert_eq!(build_afh_hamiltonian(6).unwrap().terms().len(), 15);
        assert!(build_afh_hamiltonian(1).is_err());
    }

    #[test]
    fn zero_time_is_identity() {
        let init = StateVector::basis(6, AFH_INITIAL);
        let plan = TrotterPlan::new(build_afh_hamiltonian(6).unwrap(), 0.0, 3).unwrap();
        assert_eq!(trotter_evolve(&init, &plan).unwrap(), init);
        assert!(TrotterPlan::new(build_afh_hamiltonian(6).unwrap(), 1.0, 0).is_err());
    }

    #[test]
    fn prepared_targets_are_normalized_and_evolved() {
        let qcd = prepare_qcd_state();
        assert!((qcd.norm_sqr() - 1.0).abs() < 1e-10);
        assert!(qcd.amplitude(QCD_INITIAL).norm_sqr() < 1.0 - 1e-6);
        let afh = prepare_afh_state();
        assert!((afh.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn afh_conserves_magnetization_and_peaks_on_neel_strings() {
        let afh = prepare_afh_state();
        let total_z: Vec<PauliString> = (0..6)
            .map(|q| PauliString::local(1.0, 6, &[(q, Pauli::Z)]))
            .collect();
        assert!(afh.expectation(&total_z).unwrap().abs() < 1e-12);
        let mut probs: Vec<(f64, u64)> = afh
            .probabilities()
            .into_iter()
            .enumerate()
            .map(|(i, p)| (p, i as u64))
            .collect();
        probs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let top: HashSet<u64> = [probs[0].1, probs[1].1].into_iter().collect();
        assert_eq!(top, [0b010101u64, 0b101010].into_iter().collect());
    }

    #[test]
    fn ghz_states() {
        let bell = prepare_ghz(2, 0.0).unwrap();
        assert!((bell.amplitude(0) - FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((bell.amplitude(3) - FRAC_1_SQRT_2).norm() < 1e-15);
        let shifted = prepare_ghz(6, PI / 2.0).unwrap();
        assert!((shifted.amplitude(63) - C::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        let plain = prepare_ghz(6, 0.0).unwrap();
        assert!((plain.fidelity(&shifted) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn basis_set_rule() {
        let words: Vec<String> = nnqst_basis_set(2).unwrap().iter().map(|b| b.word()).collect();
        assert_eq!(words, vec!["ZZ", "XX", "XY", "YX", "YY"]);
        assert_eq!(nnqst_basis_set(6).unwrap().len(), 21);
        for n in 2..=10 {
            let set = nnqst_basis_set(n).unwrap();
            assert_eq!(set.len(), 4 * n - 3);
            let unique: HashSet<_> = set.iter().collect();
            assert_eq!(unique.len(), set.len());
            for b in &set {
                let nz = b.non_z();
                assert!(nz.len() <= 2);
                if nz.len() == 2 {
                    assert_eq!(nz[1], nz[0] + 1);
                }
            }
        }
    }

    #[test]
    fn sx_profile_simple_states() {
        assert_eq!(staggered_sx_profile(&StateVector::basis(3, 0b101)), vec![0.0; 3]);
        let h = FRAC_1_SQRT_2;
        let plus_minus = StateVector::from_amplitudes(vec![
            C::new(0.5, 0.0),
            C::new(-0.5, 0.0),
            C::new(0.5, 0.0),
            C::new(-0.5, 0.0),
        ])
        .unwrap();
        let prof = staggered_sx_profile(&plus_minus);
        assert!((prof[0] - 0.5).abs() < 1e-15 && (prof[1] + 0.5).abs() < 1e-15);
        let _ = h;
    }
}
