//! Losses of the form `constant - sum_i w_i |<phi_i|psi>|^2` and their gradients.
//!
//! With shadow states `phi_i`, `w_i = 1 / (N f)` and `constant = 1 - (1 - 1/f) / 2^n` this is
//! the shadow estimate of the infidelity. With a single exact target and `w = 1` it is the
//! exact infidelity. Overlaps come either from Monte-Carlo samples of the model,
//! `<phi|psi> ~ mean_s phi*(s) / psi*(s)`, or from exhaustive sums.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::Ansatz;
use crate::clifford::StabilizerState;
use crate::nqs::Nqs;
use crate::quantum::AmplitudeOracle;
use crate::{Error, Result};

/// Samples with `|psi(s)|` below this are excluded from Monte-Carlo averages.
pub const AMPLITUDE_GUARD: f64 = 1e-150;

pub struct OverlapObjective<'a, O> {
    states: &'a [O],
    weights: Vec<f64>,
    constant: f64,
}

impl<'a, O: AmplitudeOracle + Sync> OverlapObjective<'a, O> {
    pub fn new(states: &'a [O], weights: Vec<f64>, constant: f64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Empty("overlap objective"));
        }
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: weights.len(),
            });
        }
        let n = states[0].qubits();
        if let Some(s) = states.iter().find(|s| s.qubits() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.qubits(),
            });
        }
        Ok(Self {
            states,
            weights,
            constant,
        })
    }

    /// Shadow-estimated infidelity with depolarizing strength `f`.
    pub fn shadows(states: &'a [O], f: f64) -> Result<Self> {
        if f == 0.0 || !f.is_finite() {
            return Err(Error::ZeroDepolarizingStrength);
        }
        let n = states.first().ok_or(Error::Empty("shadow set"))?.qubits();
        let w = 1.0 / (states.len() as f64 * f);
        let constant = 1.0 - (1.0 - 1.0 / f) / 2f64.powi(n as i32);
        Self::new(states, vec![w; states.len()], constant)
    }

    /// Exact infidelity against the single state in `target`.
    pub fn pure(target: &'a [O]) -> Result<Self> {
        if target.len() != 1 {
            return Err(Error::InvalidParameter("pure objective takes one state".into()));
        }
        Self::new(target, vec![1.0], 1.0)
    }

    pub fn n(&self) -> usize {
        self.states[0].qubits()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The loss at the given overlaps.
    pub fn loss_at(&self, overlaps: &[Complex64]) -> f64 {
        self.constant
            - overlaps
                .iter()
                .zip(&self.weights)
                .map(|(o, w)| w * o.norm_sqr())
                .sum::<f64>()
    }
}

/// Loss value, gradient with respect to the trained network, and diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub overlaps: Vec<Complex64>,
    pub excluded: usize,
}

struct Kept {
    /// Number of kept samples, counted with multiplicity.
    count: usize,
    strings: Vec<u64>,
    weights: Vec<f64>,
    psi: Vec<Complex64>,
}

/// Drops strings whose amplitude would blow up the ratio and renormalizes the weights.
fn guard(ansatz: &Ansatz, entries: &[(u64, f64, usize)]) -> Result<(Kept, usize)> {
    let strings: Vec<u64> = entries.iter().map(|e| e.0).collect();
    let waves = ansatz.forward_many(&strings);
    let mut kept = Kept {
        count: 0,
        strings: Vec::new(),
        weights: Vec::new(),
        psi: Vec::new(),
    };
    let mut excluded = 0;
    let mut total = 0.0;
    for (&(s, w, mult), wave) in entries.iter().zip(waves) {
        let psi = wave.psi();
        if !(psi.norm() >= AMPLITUDE_GUARD) || !psi.is_finite() {
            excluded += mult;
            continue;
        }
        kept.count += mult;
        kept.strings.push(s);
        kept.weights.push(w);
        kept.psi.push(psi);
        total += w;
    }
    let all: usize = entries.iter().map(|e| e.2).sum();
    if kept.strings.is_empty() || total <= 0.0 {
        return Err(Error::AllSamplesExcluded(all));
    }
    kept.weights.iter_mut().for_each(|w| *w /= total);
    Ok((kept, excluded))
}

fn estimate_from<O: AmplitudeOracle + Sync>(
    ansatz: &Ansatz,
    objective: &OverlapObjective<O>,
    entries: &[(u64, f64, usize)],
    sampled: bool,
) -> Result<Estimate> {
    if objective.n() != ansatz.n() {
        return Err(Error::DimensionMismatch {
            expected: objective.n(),
            found: ansatz.n(),
        });
    }
    let (kept, excluded) = guard(ansatz, entries)?;
    // ratios[i][k] = phi_i*(s_k) / psi*(s_k)
    let ratios: Vec<Vec<Complex64>> = objective
        .states
        .par_iter()
        .map(|phi| {
            kept.strings
                .iter()
                .zip(&kept.psi)
                .map(|(&s, psi)| (phi.query(s) / psi).conj())
                .collect()
        })
        .collect();
    let overlaps: Vec<Complex64> = ratios
        .iter()
        .map(|r| r.iter().zip(&kept.weights).map(|(x, w)| x * w).sum())
        .collect();
    let loss = if sampled && kept.count > 1 {
        // |mean|^2 overestimates |overlap|^2 by the sample variance over K; the pair
        // estimator (K |mean|^2 - mean |x|^2) / (K - 1) is unbiased.
        let k = kept.count as f64;
        let fid: f64 = ratios
            .iter()
            .zip(&overlaps)
            .zip(&objective.weights)
            .map(|((r, o), c)| {
                let second: f64 = r.iter().zip(&kept.weights).map(|(x, w)| w * x.norm_sqr()).sum();
                c * (k * o.norm_sqr() - second) / (k - 1.0)
            })
            .sum();
        objective.constant - fid
    } else {
        objective.loss_at(&overlaps)
    };

    // Loss gradient: -2 sum_s w(s) Re[W(s) D(s)], W(s) = sum_i c_i conj(O_i) phi_i*(s) / psi*(s).
    let mut seeds = BTreeMap::new();
    for (k, &s) in kept.strings.iter().enumerate() {
        let big_w: Complex64 = ratios
            .iter()
            .zip(&overlaps)
            .zip(&objective.weights)
            .map(|((r, o), c)| c * o.conj() * r[k])
            .sum();
        let w = kept.weights[k];
        seeds.insert(s, (-2.0 * w * big_w.re, 2.0 * w * big_w.im));
    }
    Ok(Estimate {
        loss,
        grad: ansatz.trainable().weighted_gradient(&seeds),
        overlaps,
        excluded,
    })
}

/// Monte-Carlo estimate from grouped samples of the model distribution. Both factors of the
/// gradient use the same samples.
pub fn sampled_estimate<O: AmplitudeOracle + Sync>(
    ansatz: &Ansatz,
    objective: &OverlapObjective<O>,
    samples: &BTreeMap<u64, usize>,
) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let entries: Vec<(u64, f64, usize)> = samples.iter().map(|(&s, &c)| (s, c as f64, c)).collect();
    estimate_from(ansatz, objective, &entries, true)
}

/// Exhaustive version: every string weighted by the model probability.
pub fn exact_estimate<O: AmplitudeOracle + Sync>(
    ansatz: &Ansatz,
    objective: &OverlapObjective<O>,
) -> Result<Estimate> {
    let all: Vec<u64> = (0..1u64 << ansatz.n()).collect();
    let probs: Vec<f64> = ansatz
        .sampler()
        .forward_many(&all)
        .into_iter()
        .map(|w| (2.0 * w.log_sqrt_p).exp())
        .collect();
    let entries: Vec<(u64, f64, usize)> = all
        .into_iter()
        .zip(probs)
        .filter(|&(_, p)| p > 0.0)
        .map(|(s, p)| (s, p, 1))
        .collect();
    estimate_from(ansatz, objective, &entries, false)
}

/// `mean_s phi*(s) / psi*(s)` over the samples, and the number excluded by the guard.
pub fn mc_overlap(ansatz: &Ansatz, phi: &StabilizerState, samples: &BTreeMap<u64, usize>) -> Result<(Complex64, usize)> {
    if phi.n() != ansatz.n() {
        return Err(Error::DimensionMismatch {
            expected: ansatz.n(),
            found: phi.n(),
        });
    }
    let entries: Vec<(u64, f64, usize)> = samples.iter().map(|(&s, &c)| (s, c as f64, c)).collect();
    let (kept, excluded) = guard(ansatz, &entries)?;
    let o = kept
        .strings
        .iter()
        .zip(&kept.psi)
        .zip(&kept.weights)
        .map(|((&s, psi), w)| (phi.amplitude(s) / psi).conj() * w)
        .sum();
    Ok((o, excluded))
}

/// Hybrid estimate for `psi~(s) = sqrt(P(s)) e^{i phase(s)}` on a fixed support: overlaps are
/// exact sums over the support, and only the phase network is differentiated. `table` lists
/// `(s, P(s))` in increasing `s`.
pub fn hybrid_estimate<O: AmplitudeOracle + Sync>(
    phase: &Nqs,
    table: &[(u64, f64)],
    objective: &OverlapObjective<O>,
) -> Result<Estimate> {
    if table.is_empty() {
        return Err(Error::Empty("support table"));
    }
    if objective.n() != phase.n() {
        return Err(Error::DimensionMismatch {
            expected: objective.n(),
            found: phase.n(),
        });
    }
    let total: f64 = table.iter().map(|e| e.1).sum();
    if (total - 1.0).abs() > 1e-9 || table.iter().any(|e| !(e.1 >= 0.0)) {
        return Err(Error::NotNormalized(total));
    }
    let strings: Vec<u64> = table.iter().map(|e| e.0).collect();
    if strings.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("support must be sorted and distinct".into()));
    }
    let psi: Vec<Complex64> = phase
        .forward_many(&strings)
        .into_iter()
        .zip(table)
        .map(|(w, &(_, p))| Complex64::from_polar(p.sqrt(), w.phase_raw))
        .collect();
    // terms[i][k] = phi_i*(s_k) psi~(s_k)
    let terms: Vec<Vec<Complex64>> = objective
        .states
        .par_iter()
        .map(|phi| strings.iter().zip(&psi).map(|(&s, p)| phi.query(s).conj() * p).collect())
        .collect();
    let overlaps: Vec<Complex64> = terms.iter().map(|t| t.iter().sum()).collect();
    let loss = objective.loss_at(&overlaps);
    let mut seeds = BTreeMap::new();
    for (k, &s) in strings.iter().enumerate() {
        let g: f64 = terms
            .iter()
            .zip(&overlaps)
            .zip(&objective.weights)
            .map(|((t, o), c)| c * (o.conj() * t[k]).im)
            .sum();
        seeds.insert(s, (0.0, 2.0 * g));
    }
    Ok(Estimate {
        loss,
        grad: phase.weighted_gradient(&seeds),
        overlaps,
        excluded: 0,
    })
}
