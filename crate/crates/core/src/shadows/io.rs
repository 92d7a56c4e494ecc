//! Binary shadow-set files, all integers and floats little-endian:
//!
//! ```text
//! magic    "NSQS"
//! version  u32
//! n        u32
//! count    u64
//! noise    u8 tag (0 none, 1 amplitude damping, 2 CNOT depolarizing, 3 custom), f64 parameter
//!          custom only: u32 operator count, then each 2^n x 2^n operator row-major as
//!          (re f64, im f64) pairs
//! seed     u64
//! shadows  count x (packed tableau, outcome bits packed with qubit q at bit q)
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{ClassicalShadow, NoiseModel, ShadowSet};
use crate::clifford::{get_packed, packed_len, set_packed, CliffordElement};
use crate::quantum::{qubit_bit, BitString, KrausChannel, MAX_QUBITS};
use crate::{Error, Result};

pub const SHADOW_MAGIC: &[u8; 4] = b"NSQS";
pub const SHADOW_FORMAT_VERSION: u32 = 1;

pub fn write_shadow_set<W: Write>(set: &ShadowSet, mut w: W) -> Result<()> {
    w.write_all(SHADOW_MAGIC)?;
    w.write_all(&SHADOW_FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(set.n as u32).to_le_bytes())?;
    w.write_all(&(set.len() as u64).to_le_bytes())?;
    let (tag, param) = match &set.noise {
        NoiseModel::None => (0u8, 0.0),
        NoiseModel::AmplitudeDamping(p) => (1, *p),
        NoiseModel::CnotDepolarizing(f) => (2, *f),
        NoiseModel::Custom(_) => (3, 0.0),
    };
    w.write_all(&[tag])?;
    w.write_all(&param.to_le_bytes())?;
    if let NoiseModel::Custom(ch) = &set.noise {
        w.write_all(&(ch.operators().len() as u32).to_le_bytes())?;
        for op in ch.operators() {
            for v in op {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    w.write_all(&set.seed.to_le_bytes())?;
    let outcome_len = packed_len(set.n);
    for s in &set.shadows {
        w.write_all(&s.clifford.to_bytes())?;
        let mut bits = vec![0u8; outcome_len];
        for q in 0..set.n {
            set_packed(&mut bits, q, s.outcome.bit(q) == 1);
        }
        w.write_all(&bits)?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

pub fn read_shadow_set<R: Read>(mut r: R) -> Result<ShadowSet> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != SHADOW_MAGIC {
        return Err(Error::Format("not a shadow file".into()));
    }
    let version = read_u32(&mut r)?;
    if version != SHADOW_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            expected: SHADOW_FORMAT_VERSION,
            found: version,
        });
    }
    let n = read_u32(&mut r)? as usize;
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(Error::Format(format!("qubit count {n} out of range")));
    }
    let count = read_u64(&mut r)?;
    let [tag] = read_array::<1, _>(&mut r)?;
    let param = read_f64(&mut r)?;
    let noise = match tag {
        0 => NoiseModel::None,
        1 => NoiseModel::AmplitudeDamping(param),
        2 => NoiseModel::CnotDepolarizing(param),
        3 => {
            let ops = read_u32(&mut r)? as usize;
            let dim = 1usize << n;
            if ops == 0 || ops > dim * dim * 4 {
                return Err(Error::Format(format!("implausible Kraus operator count {ops}")));
            }
            let mut operators = Vec::with_capacity(ops);
            for _ in 0..ops {
                let mut op = Vec::with_capacity(dim * dim);
                for _ in 0..dim * dim {
                    let re = read_f64(&mut r)?;
                    let im = read_f64(&mut r)?;
                    op.push(Complex64::new(re, im));
                }
                operators.push(op);
            }
            NoiseModel::Custom(KrausChannel::new(n, operators)?)
        }
        t => return Err(Error::Format(format!("unknown noise tag {t}"))),
    };
    let seed = read_u64(&mut r)?;
    let tableau_len = CliffordElement::serialized_len(n);
    let outcome_len = packed_len(n);
    let mut shadows = Vec::with_capacity(count.min(1 << 20) as usize);
    let mut tableau = vec![0u8; tableau_len];
    let mut outcome = vec![0u8; outcome_len];
    for _ in 0..count {
        r.read_exact(&mut tableau)?;
        r.read_exact(&mut outcome)?;
        let clifford = CliffordElement::from_bytes(n, &tableau)?;
        let mut value = 0u64;
        for q in 0..n {
            value |= (get_packed(&outcome, q) as u64) << qubit_bit(q, n);
        }
        if (n..8 * outcome_len).any(|k| get_packed(&outcome, k)) {
            return Err(Error::Format("nonzero padding in outcome".into()));
        }
        shadows.push(ClassicalShadow::new(clifford, BitString::new(n, value))?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after shadow records".into()));
    }
    ShadowSet::new(n, shadows, noise, seed)
}
