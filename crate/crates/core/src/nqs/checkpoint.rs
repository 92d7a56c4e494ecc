//! Parameter checkpoints, little-endian:
//!
//! ```text
//! magic    "NQSP"
//! version  u32
//! count    u32 networks, then per network:
//!   n, layers, heads, dim   u32 each
//!   mode                    u8 (0 both, 1 amplitude only, 2 phase only)
//!   length                  u64, must equal the layout size
//!   params                  length x f64
//! ```

use std::io::{Read, Write};

use super::{param_count, Architecture, Mode, Nqs};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NQSP";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(nets: &[&Nqs], mut w: W) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(nets.len() as u32).to_le_bytes())?;
    for net in nets {
        let a = net.arch();
        for v in [a.n, a.layers, a.heads, a.dim] {
            w.write_all(&(v as u32).to_le_bytes())?;
        }
        w.write_all(&[net.mode().tag()])?;
        w.write_all(&(net.params().len() as u64).to_le_bytes())?;
        for p in net.params() {
            w.write_all(&p.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_bytes<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Vec<Nqs>> {
    if &read_bytes::<4, _>(&mut r)? != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a checkpoint file".into()));
    }
    let version = u32::from_le_bytes(read_bytes(&mut r)?);
    if version != CHECKPOINT_VERSION {
        return Err(Error::UnsupportedVersion {
            expected: CHECKPOINT_VERSION,
            found: version,
        });
    }
    let count = u32::from_le_bytes(read_bytes(&mut r)?);
    if count == 0 || count > 16 {
        return Err(Error::Format(format!("implausible network count {count}")));
    }
    let mut nets = Vec::new();
    for _ in 0..count {
        let mut dims = [0usize; 4];
        for v in dims.iter_mut() {
            *v = u32::from_le_bytes(read_bytes(&mut r)?) as usize;
        }
        let arch = Architecture::new(dims[0], dims[1], dims[2], dims[3])
            .map_err(|e| Error::Format(format!("bad architecture: {e}")))?;
        let [tag] = read_bytes::<1, _>(&mut r)?;
        let mode = Mode::from_tag(tag)?;
        let len = u64::from_le_bytes(read_bytes(&mut r)?) as usize;
        if len != param_count(&arch, mode) {
            return Err(Error::Format(format!(
                "parameter length {len} does not match layout {}",
                param_count(&arch, mode)
            )));
        }
        let mut params = Vec::with_capacity(len);
        for _ in 0..len {
            params.push(f64::from_le_bytes(read_bytes(&mut r)?));
        }
        nets.push(Nqs::from_params(arch, mode, params)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after checkpoint".into()));
    }
    Ok(nets)
}
