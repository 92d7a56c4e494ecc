use rayon::prelude::*;

use super::ShadowSet;
use crate::quantum::{AmplitudeOracle, KrausChannel};
use crate::{Error, Result};

/// `sum_s <s| E(|s><s|) |s>`.
pub fn fid_of_channel(ch: &KrausChannel, n: usize) -> Result<f64> {
    if ch.arity() != n {
        return Err(Error::ArityMismatch {
            arity: ch.arity(),
            targets: n,
        });
    }
    let dev = ch.completeness_error();
    if dev > 1e-10 {
        return Err(Error::NotTracePreserving(dev));
    }
    let d = ch.dim();
    Ok(ch
        .operators()
        .iter()
        .map(|k| (0..d).map(|s| k[s * d + s].norm_sqr()).sum::<f64>())
        .sum())
}

/// Strength of the depolarizing channel that the Clifford twirl of `E` composes to.
pub fn f_of_channel(ch: &KrausChannel, n: usize) -> Result<f64> {
    Ok((fid_of_channel(ch, n)? - 1.0) / (4f64.powi(n as i32) - 1.0))
}

pub fn f_amplitude_damping(n: usize, p: f64) -> f64 {
    ((1.0 + p).powi(n as i32) - 1.0) / (4f64.powi(n as i32) - 1.0)
}

/// `1 / (2^n + 1)`.
pub fn noise_free_f(n: usize) -> f64 {
    1.0 / (2f64.powi(n as i32) + 1.0)
}

/// Per-shadow `<psi| rho_i |psi>` with `rho_i = (|phi_i><phi_i| - (1 - f) I / 2^n) / f`.
pub fn shadow_fidelities<A: AmplitudeOracle + Sync + ?Sized>(
    set: &ShadowSet,
    psi: &A,
    f: f64,
) -> Result<Vec<f64>> {
    if f == 0.0 {
        return Err(Error::ZeroDepolarizingStrength);
    }
    if psi.qubits() != set.n {
        return Err(Error::DimensionMismatch {
            expected: set.n,
            found: psi.qubits(),
        });
    }
    let offset = (1.0 - 1.0 / f) / 2f64.powi(set.n as i32);
    set.shadows
        .par_iter()
        .map(|s| Ok(s.state().overlap(psi)?.norm_sqr() / f + offset))
        .collect()
}

pub fn estimate_fidelity<A: AmplitudeOracle + Sync + ?Sized>(
    set: &ShadowSet,
    psi: &A,
    f: f64,
) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Empty("shadow set"));
    }
    let v = shadow_fidelities(set, psi, f)?;
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Maps a loss computed with the noise-free inversion to the true infidelity when the
/// device's measurement noise has depolarizing strength `f`.
pub fn transformed_loss(noiseless_loss: f64, f: f64, n: usize) -> Result<f64> {
    if f == 0.0 {
        return Err(Error::ZeroDepolarizingStrength);
    }
    let d = 2f64.powi(n as i32);
    Ok(noiseless_loss / ((d + 1.0) * f) + ((d * d - 1.0) * f - d + 1.0) / (d * (d + 1.0) * f))
}

/// Median of `k` batch means; the last batch absorbs the remainder.
pub fn median_of_means(values: &[f64], k: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("median-of-means input"));
    }
    if k == 0 || k > values.len() {
        return Err(Error::InvalidParameter(format!(
            "batch count {k} must lie in [1, {}]",
            values.len()
        )));
    }
    let size = values.len() / k;
    let mut means: Vec<f64> = (0..k)
        .map(|b| {
            let end = if b + 1 == k { values.len() } else { (b + 1) * size };
            let chunk = &values[b * size..end];
            chunk.iter().sum::<f64>() / chunk.len() as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    Ok(if k % 2 == 1 {
        means[k / 2]
    } else {
        0.5 * (means[k / 2 - 1] + means[k / 2])
    })
}
