//! Optimizer and progress state needed to continue a run, little-endian:
//!
//! ```text
//! magic      "NQTS"
//! version    u32
//! protocol   u8
//! stage      u32 index into the protocol's stages
//! iteration  u64 steps completed in that stage
//! adam step  u64
//! length     u64
//! m, v       length x f64 each
//! ```

use std::io::{Read, Write};

use super::{AdamState, Protocol};
use crate::{Error, Result};

pub const STATE_MAGIC: &[u8; 4] = b"NQTS";
pub const STATE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainerState {
    pub protocol: Protocol,
    pub stage_index: usize,
    pub iteration: u64,
    pub adam: AdamState,
}

fn read_bytes<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn write_trainer_state<W: Write>(state: &TrainerState, mut w: W) -> Result<()> {
    w.write_all(STATE_MAGIC)?;
    w.write_all(&STATE_VERSION.to_le_bytes())?;
    w.write_all(&[state.protocol.tag()])?;
    w.write_all(&(state.stage_index as u32).to_le_bytes())?;
    w.write_all(&state.iteration.to_le_bytes())?;
    w.write_all(&state.adam.step.to_le_bytes())?;
    w.write_all(&(state.adam.len() as u64).to_le_bytes())?;
    for x in state.adam.m.iter().chain(&state.adam.v) {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_trainer_state<R: Read>(mut r: R) -> Result<TrainerState> {
    if &read_bytes::<4, _>(&mut r)? != STATE_MAGIC {
        return Err(Error::Format("not a trainer state file".into()));
    }
    let version = u32::from_le_bytes(read_bytes(&mut r)?);
    if version != STATE_VERSION {
        return Err(Error::UnsupportedVersion {
            expected: STATE_VERSION,
            found: version,
        });
    }
    let [tag] = read_bytes::<1, _>(&mut r)?;
    let protocol = Protocol::from_tag(tag)?;
    let stage_index = u32::from_le_bytes(read_bytes(&mut r)?) as usize;
    if stage_index >= protocol.stages().len() {
        return Err(Error::Format(format!("stage {stage_index} out of range")));
    }
    let iteration = u64::from_le_bytes(read_bytes(&mut r)?);
    let step = u64::from_le_bytes(read_bytes(&mut r)?);
    let len = u64::from_le_bytes(read_bytes(&mut r)?);
    if len > 1 << 28 {
        return Err(Error::Format(format!("implausible moment length {len}")));
    }
    let mut read_vec = || -> Result<Vec<f64>> {
        (0..len).map(|_| Ok(f64::from_le_bytes(read_bytes(&mut r)?))).collect()
    };
    let m = read_vec()?;
    let v = read_vec()?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after trainer state".into()));
    }
    Ok(TrainerState {
        protocol,
        stage_index,
        iteration,
        adam: AdamState { m, v, step },
    })
}
