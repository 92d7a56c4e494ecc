//! Target states and their files, little-endian:
//!
//! ```text
//! magic     "NQSV"
//! version   u32
//! metadata  u32 byte length, then a UTF-8 JSON object describing the target
//! n         u32
//! amps      2^n x (re f64, im f64)
//! ```

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nsqst_core::quantum::{StateVector, MAX_QUBITS};
use nsqst_core::report::Observable;
use nsqst_core::targets::{
    prepare_afh_state, prepare_ghz, prepare_qcd_state, qcd_kinetic, AFH_QUBITS, AFH_STEPS, AFH_TIME, QCD_MASS, QCD_STEPS,
    QCD_TIME, QCD_X,
};

pub const TARGET_MAGIC: &[u8; 4] = b"NQSV";
pub const TARGET_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum TargetSpec {
    Qcd,
    Afh,
    Ghz { n: usize, phase: f64 },
}

/// Everything recorded about a prepared target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(flatten)]
    pub spec: TargetSpec,
    pub qubits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

impl TargetSpec {
    pub fn qubits(&self) -> usize {
        match self {
            TargetSpec::Qcd => qcd_kinetic().n(),
            TargetSpec::Afh => AFH_QUBITS,
            TargetSpec::Ghz { n, .. } => *n,
        }
    }

    pub fn prepare(&self) -> Result<StateVector> {
        Ok(match *self {
            TargetSpec::Qcd => prepare_qcd_state(),
            TargetSpec::Afh => prepare_afh_state(),
            TargetSpec::Ghz { n, phase } => prepare_ghz(n, phase)?,
        })
    }

    pub fn metadata(&self) -> Metadata {
        let mut m = Metadata {
            spec: *self,
            qubits: self.qubits(),
            mass: None,
            x: None,
            time: None,
            steps: None,
        };
        match self {
            TargetSpec::Qcd => {
                m.mass = Some(QCD_MASS);
                m.x = Some(QCD_X);
                m.time = Some(QCD_TIME);
                m.steps = Some(QCD_STEPS);
            }
            TargetSpec::Afh => {
                m.time = Some(AFH_TIME);
                m.steps = Some(AFH_STEPS);
            }
            TargetSpec::Ghz { .. } => {}
        }
        m
    }

    /// Observables worth comparing for this target.
    pub fn observables(&self) -> &'static [Observable] {
        match self {
            TargetSpec::Qcd => &[Observable::KineticEnergy],
            TargetSpec::Afh => &[Observable::SxProfile],
            TargetSpec::Ghz { .. } => &[],
        }
    }
}

pub fn write_target<W: Write>(meta: &Metadata, state: &StateVector, mut w: W) -> Result<()> {
    let json = serde_json::to_vec(meta)?;
    w.write_all(TARGET_MAGIC)?;
    w.write_all(&TARGET_VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    w.write_all(&(state.n() as u32).to_le_bytes())?;
    for a in state.amps() {
        w.write_all(&a.re.to_le_bytes())?;
        w.write_all(&a.im.to_le_bytes())?;
    }
    Ok(())
}

fn u32_at<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn f64_at<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_target<R: Read>(mut r: R) -> Result<(Metadata, StateVector)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != TARGET_MAGIC {
        bail!("not a target state file");
    }
    let version = u32_at(&mut r)?;
    if version != TARGET_VERSION {
        bail!("unsupported target file version {version} (expected {TARGET_VERSION})");
    }
    let len = u32_at(&mut r)? as usize;
    if len > 1 << 16 {
        bail!("implausible metadata length {len}");
    }
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let meta: Metadata = serde_json::from_slice(&json).context("target metadata")?;
    let n = u32_at(&mut r)? as usize;
    if n == 0 || n > MAX_QUBITS || n != meta.qubits {
        bail!("bad qubit count {n}");
    }
    let mut amps = Vec::with_capacity(1 << n);
    for _ in 0..1usize << n {
        let re = f64_at(&mut r)?;
        amps.push(Complex64::new(re, f64_at(&mut r)?));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        bail!("trailing bytes after target state");
    }
    Ok((meta, StateVector::from_amplitudes(amps)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_target() {
        for spec in [TargetSpec::Qcd, TargetSpec::Afh, TargetSpec::Ghz { n: 4, phase: 0.3 }] {
            let state = spec.prepare().unwrap();
            let mut buf = Vec::new();
            write_target(&spec.metadata(), &state, &mut buf).unwrap();
            let (meta, back) = read_target(buf.as_slice()).unwrap();
            assert_eq!(meta, spec.metadata());
            assert_eq!(back, state);
            let mut bad = buf.clone();
            bad[4] = 7;
            assert!(read_target(bad.as_slice()).is_err());
            assert!(read_target(&buf[..buf.len() - 1]).is_err());
        }
    }

    #[test]
    fn metadata_records_evolution_parameters() {
        let q = TargetSpec::Qcd.metadata();
        assert_eq!((q.mass, q.x, q.time, q.steps), (Some(1.2), Some(0.8), Some(1.8), Some(2)));
        let a = TargetSpec::Afh.metadata();
        assert_eq!((a.time, a.steps), (Some(0.8), Some(4)));
        let json = serde_json::to_string(&TargetSpec::Ghz { n: 3, phase: 1.0 }.metadata()).unwrap();
        assert_eq!(json, r#"{"target":"ghz","n":3,"phase":1.0,"qubits":3}"#);
    }
}
