//! Cross-entropy training on local Pauli-basis measurements.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::nqs::Nqs;
use crate::quantum::{qubit_bit, rotation_element, PauliBasis};
use crate::{Error, Result};

/// Bases with more rotated qubits than this are rejected.
pub const MAX_ROTATED: usize = 16;

/// Probabilities below this are clamped before taking the logarithm.
pub const PROB_FLOOR: f64 = 1e-300;

/// Computational strings `t` with `<s, B | t> != 0` and those coefficients.
pub fn basis_expansion(s: u64, basis: &PauliBasis) -> Result<Vec<(u64, Complex64)>> {
    let n = basis.n();
    let rotated = basis.non_z();
    if rotated.len() > MAX_ROTATED {
        return Err(Error::BasisTooLarge(rotated.len()));
    }
    let letters = basis.letters();
    let mask: u64 = rotated.iter().map(|&q| 1u64 << qubit_bit(q, n)).sum();
    let mut out = Vec::with_capacity(1 << rotated.len());
    for pattern in 0..1u64 << rotated.len() {
        let mut t = s & !mask;
        let mut c = Complex64::new(1.0, 0.0);
        for (k, &q) in rotated.iter().enumerate() {
            let tq = (pattern >> k) & 1;
            let sq = (s >> qubit_bit(q, n)) & 1;
            t |= tq << qubit_bit(q, n);
            c *= rotation_element(letters[q], sq, tq);
        }
        out.push((t, c));
    }
    Ok(out)
}

/// Probability of outcome `s` when the network's state is measured in `basis`.
pub fn nnqst_prob(net: &Nqs, s: u64, basis: &PauliBasis) -> Result<f64> {
    check_basis(net, basis)?;
    let amp: Complex64 = basis_expansion(s, basis)?
        .into_iter()
        .map(|(t, c)| c * net.forward(t).psi())
        .sum();
    Ok(amp.norm_sqr())
}

fn check_basis(net: &Nqs, basis: &PauliBasis) -> Result<()> {
    if basis.n() != net.n() {
        return Err(Error::DimensionMismatch {
            expected: net.n(),
            found: basis.n(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct NnqstStep {
    /// Mean negative log-likelihood of the batch.
    pub loss: f64,
    pub grad: Vec<f64>,
    /// Samples whose probability fell below [`PROB_FLOOR`]; they contribute no gradient.
    pub clamped: usize,
}

/// Mean `-ln p(s, B)` over the batch and its gradient.
///
/// Every distinct computational string touched by the batch is evaluated and back-propagated
/// once.
pub fn nnqst_loss_grad(net: &Nqs, batch: &[(u64, &PauliBasis)]) -> Result<NnqstStep> {
    if batch.is_empty() {
        return Err(Error::Empty("training batch"));
    }
    let mut expansions = Vec::with_capacity(batch.len());
    let mut distinct = BTreeSet::new();
    for &(s, basis) in batch {
        check_basis(net, basis)?;
        let e = basis_expansion(s, basis)?;
        distinct.extend(e.iter().map(|&(t, _)| t));
        expansions.push(e);
    }
    let strings: Vec<u64> = distinct.into_iter().collect();
    let psi: BTreeMap<u64, Complex64> = strings
        .iter()
        .zip(net.forward_many(&strings))
        .map(|(&t, w)| (t, w.psi()))
        .collect();

    let scale = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    let mut clamped = 0;
    let mut seeds: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for e in &expansions {
        let amp: Complex64 = e.iter().map(|(t, c)| c * psi[t]).sum();
        let p = amp.norm_sqr();
        if !(p >= PROB_FLOOR) {
            clamped += 1;
            loss -= PROB_FLOOR.ln() * scale;
            continue;
        }
        loss -= p.ln() * scale;
        for (t, c) in e {
            // d(-ln p) = -2 Re[w (d log sqrt p + i d phase)] with w = c psi(t) / amp.
            let w = c * psi[t] / amp;
            let seed = seeds.entry(*t).or_insert((0.0, 0.0));
            seed.0 -= 2.0 * w.re * scale;
            seed.1 += 2.0 * w.im * scale;
        }
    }
    if clamped > 0 {
        log::debug!("{clamped} samples clamped at probability {PROB_FLOOR:e}");
    }
    Ok(NnqstStep {
        loss,
        grad: net.weighted_gradient(&seeds),
        clamped,
    })
}

