//! Comparison of a reconstructed state with its target, and CSV export.

use std::f64::consts::TAU;
use std::io::Write;

use crate::quantum::{BitString, StateVector};
use crate::targets::{qcd_kinetic, staggered_sx_profile};
use crate::training::Metrics;
use crate::{Error, Result};

/// Phases of strings with `sqrt p` below this are not reported.
pub const PHASE_CUTOFF: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeRow {
    pub bitstring: BitString,
    pub target_sqrt_p: f64,
    pub target_phase: Option<f64>,
    pub model_sqrt_p: f64,
    pub model_phase: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    /// Expectation of the hopping part of the lattice gauge Hamiltonian.
    KineticEnergy,
    /// `<X_j> / 2` on every site.
    SxProfile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRow {
    pub name: String,
    pub target: f64,
    pub model: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub infidelity: f64,
    pub rows: Vec<AmplitudeRow>,
    pub observables: Vec<ObservableRow>,
}

fn check(model: &StateVector, target: &StateVector) -> Result<()> {
    if model.n() != target.n() {
        return Err(Error::DimensionMismatch {
            expected: target.n(),
            found: model.n(),
        });
    }
    Ok(())
}

/// Per-string magnitudes and phases in `[0, 2 pi)`. The model's global phase is chosen so
/// that it agrees with the target on the target's most probable string; phases are omitted
/// where `sqrt p < PHASE_CUTOFF`.
pub fn amplitude_table(model: &StateVector, target: &StateVector) -> Result<Vec<AmplitudeRow>> {
    check(model, target)?;
    let n = target.n();
    let peak = target
        .amps()
        .iter()
        .enumerate()
        .fold(0, |best, (i, a)| if a.norm_sqr() > target.amps()[best].norm_sqr() { i } else { best });
    let shift = target.amps()[peak].arg() - model.amps()[peak].arg();
    let shown = |r: f64, phase: f64| (r >= PHASE_CUTOFF).then(|| phase.rem_euclid(TAU));
    Ok(target
        .amps()
        .iter()
        .zip(model.amps())
        .enumerate()
        .map(|(s, (t, m))| AmplitudeRow {
            bitstring: BitString::new(n, s as u64),
            target_sqrt_p: t.norm(),
            target_phase: shown(t.norm(), t.arg()),
            model_sqrt_p: m.norm(),
            model_phase: shown(m.norm(), m.arg() + shift),
        })
        .collect())
}

pub fn observables(model: &StateVector, target: &StateVector, kinds: &[Observable]) -> Result<Vec<ObservableRow>> {
    check(model, target)?;
    let mut rows = Vec::new();
    for kind in kinds {
        match kind {
            Observable::KineticEnergy => {
                let h = qcd_kinetic();
                if h.n() != target.n() {
                    return Err(Error::DimensionMismatch {
                        expected: h.n(),
                        found: target.n(),
                    });
                }
                rows.push(ObservableRow {
                    name: "H_kin".into(),
                    target: h.expectation(target)?,
                    model: h.expectation(model)?,
                });
            }
            Observable::SxProfile => {
                let t = staggered_sx_profile(target);
                let m = staggered_sx_profile(model);
                for (j, (a, b)) in t.into_iter().zip(m).enumerate() {
                    rows.push(ObservableRow {
                        name: format!("Sx_{j}"),
                        target: a,
                        model: b,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn evaluate(model: &StateVector, target: &StateVector, kinds: &[Observable]) -> Result<Report> {
    check(model, target)?;
    Ok(Report {
        infidelity: (1.0 - model.fidelity(target)).max(0.0),
        rows: amplitude_table(model, target)?,
        observables: observables(model, target, kinds)?,
    })
}

fn field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10}")).unwrap_or_default()
}

/// Columns `bitstring,target_sqrt_p,target_phase,model_sqrt_p,model_phase`; omitted phases
/// are empty fields.
pub fn write_amplitude_csv<W: Write>(rows: &[AmplitudeRow], mut w: W) -> Result<()> {
    writeln!(w, "bitstring,target_sqrt_p,target_phase,model_sqrt_p,model_phase")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.10},{},{:.10},{}",
            r.bitstring,
            r.target_sqrt_p,
            field(r.target_phase),
            r.model_sqrt_p,
            field(r.model_phase)
        )?;
    }
    Ok(())
}

/// Columns `observable,target,model`.
pub fn write_observable_csv<W: Write>(rows: &[ObservableRow], mut w: W) -> Result<()> {
    writeln!(w, "observable,target,model")?;
    for r in rows {
        writeln!(w, "{},{:.10},{:.10}", r.name, r.target, r.model)?;
    }
    Ok(())
}

/// Columns `stage,iter,loss_est,exact_infid,excluded_samples,elapsed_ms`.
pub fn write_metrics_csv<W: Write>(records: &[Metrics], mut w: W) -> Result<()> {
    writeln!(w, "stage,iter,loss_est,exact_infid,excluded_samples,elapsed_ms")?;
    for m in records {
        let stage = match m.stage {
            crate::training::Stage::Nnqst => "nnqst",
            crate::training::Stage::Pretrain => "pretrain",
            crate::training::Stage::Nsqst => "nsqst",
            crate::training::Stage::Hybrid => "hybrid",
        };
        writeln!(
            w,
            "{stage},{},{},{},{},{}",
            m.iter,
            field(m.loss_est),
            field(m.exact_infid),
            m.excluded_samples,
            m.elapsed_ms
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{prepare_afh_state, prepare_ghz, prepare_qcd_state};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn exact_model_reports_zero_infidelity_and_matching_phases() {
        let target = prepare_ghz(4, FRAC_PI_2).unwrap();
        // Same state up to a global phase.
        let rotated: Vec<Complex64> = target.amps().iter().map(|a| a * Complex64::from_polar(1.0, 2.2)).collect();
        let model = StateVector::from_amplitudes(rotated).unwrap();
        let report = evaluate(&model, &target, &[]).unwrap();
        assert!(report.infidelity < 1e-12);
        for r in &report.rows {
            assert!((r.target_sqrt_p - r.model_sqrt_p).abs() < 1e-12);
            match (r.target_phase, r.model_phase) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                (None, None) => {}
                other => panic!("phase presence differs: {other:?}"),
            }
        }
        let shown: Vec<_> = report.rows.iter().filter_map(|r| r.target_phase).collect();
        assert_eq!(shown.len(), 2);
        assert!((shown[1] - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn small_amplitudes_have_no_phase() {
        let amps = vec![
            Complex64::new(0.99, 0.0),
            Complex64::new(0.0, 0.05),
            Complex64::new(-0.12, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let s = StateVector::normalized(amps).unwrap();
        let rows = amplitude_table(&s, &s).unwrap();
        assert!(rows[0].target_phase.is_some());
        assert!(rows[1].target_phase.is_none());
        assert!(rows[3].model_phase.is_none());
        let phase = rows[2].target_phase.unwrap();
        assert!((phase - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn observables_and_csv() {
        let qcd = prepare_qcd_state();
        let rows = observables(&qcd, &qcd, &[Observable::KineticEnergy]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].target, rows[0].model);
        let afh = prepare_afh_state();
        let rows = observables(&afh, &afh, &[Observable::SxProfile]).unwrap();
        assert_eq!(rows.len(), 6);
        let mut buf = Vec::new();
        write_observable_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("observable,target,model\nSx_0,"));
        let table = amplitude_table(&afh, &afh).unwrap();
        let mut buf = Vec::new();
        write_amplitude_csv(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.lines().nth(1).unwrap().starts_with("000000,"));
        assert!(observables(&prepare_ghz(3, 0.0).unwrap(), &prepare_ghz(3, 0.0).unwrap(), &[Observable::KineticEnergy]).is_err());
    }

    #[test]
    fn report_is_deterministic() {
        let t = prepare_afh_state();
        let m = prepare_ghz(6, 0.3).unwrap();
        let kinds = [Observable::SxProfile, Observable::KineticEnergy];
        assert_eq!(evaluate(&m, &t, &kinds).unwrap(), evaluate(&m, &t, &kinds).unwrap());
        assert!(evaluate(&prepare_ghz(3, 0.0).unwrap(), &t, &kinds).is_err());
    }
}
