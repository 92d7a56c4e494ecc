//! Clifford group elements as stabilizer tableaux.
//!
//! Row `2j` of a tableau holds `U X_j U^dagger`, row `2j + 1` holds `U Z_j U^dagger`, each as
//! X/Z bit masks (qubit `q` at bit `n - 1 - q`) plus a sign bit.

mod decompose;
mod sampler;
mod stabilizer;

pub use decompose::decompose;
pub use sampler::{clifford_from_index, group_order, sample_uniform_clifford, symplectic_count};
pub use stabilizer::{amplitude, stabilizer_state, StabilizerState};

use crate::quantum::{qubit_bit, Gate, GateKind, PauliString, MAX_QUBITS};
use crate::{Error, Result};

/// `i^phase X^x Z^z` with X to the left of Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct PauliOp {
    pub phase: u8,
    pub x: u64,
    pub z: u64,
}

impl PauliOp {
    pub fn identity() -> Self {
        Self { phase: 0, x: 0, z: 0 }
    }

    /// Hermitian Pauli `(-1)^sign X^x Z^z` with the `i` per Y folded in.
    pub fn hermitian(x: u64, z: u64, sign: bool) -> Self {
        let phase = (2 * sign as u32 + (x & z).count_ones()) % 4;
        Self {
            phase: phase as u8,
            x,
            z,
        }
    }

    pub fn mul(self, rhs: Self) -> Self {
        let phase = self.phase as u32 + rhs.phase as u32 + 2 * (self.z & rhs.x).count_ones();
        Self {
            phase: (phase % 4) as u8,
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
        }
    }

    /// Sign bit of a Hermitian operator; `None` if the phase is imaginary.
    pub fn sign(self) -> Option<bool> {
        match (self.phase as u32 + 4 - (self.x & self.z).count_ones() % 4) % 4 {
            0 => Some(false),
            2 => Some(true),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordElement {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    signs: u64,
}

impl CliffordElement {
    pub fn identity(n: usize) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n), "qubit count {n} out of range");
        let mut x = vec![0; 2 * n];
        let mut z = vec![0; 2 * n];
        for q in 0..n {
            x[2 * q] = 1 << qubit_bit(q, n);
            z[2 * q + 1] = 1 << qubit_bit(q, n);
        }
        Self { n, x, z, signs: 0 }
    }

    /// Builds an element from raw rows, checking the symplectic condition.
    pub fn from_rows(n: usize, x: Vec<u64>, z: Vec<u64>, signs: u64) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(Error::InvalidParameter(format!("qubit count {n} out of range")));
        }
        if x.len() != 2 * n || z.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: x.len().min(z.len()),
            });
        }
        let limit = 1u64 << n;
        if x.iter().chain(&z).any(|&m| m >= limit) || signs >> (2 * n) != 0 {
            return Err(Error::Format("tableau bits exceed register".into()));
        }
        let c = Self { n, x, z, signs };
        if !c.is_symplectic() {
            return Err(Error::Format("tableau is not symplectic".into()));
        }
        Ok(c)
    }

    pub fn from_gates(n: usize, gates: &[Gate]) -> Result<Self> {
        let mut c = Self::identity(n);
        for g in gates {
            c.apply_gate(g)?;
        }
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_rows(&self) -> &[u64] {
        &self.x
    }

    pub fn z_rows(&self) -> &[u64] {
        &self.z
    }

    pub fn signs(&self) -> u64 {
        self.signs
    }

    pub(crate) fn row(&self, i: usize) -> PauliOp {
        PauliOp::hermitian(self.x[i], self.z[i], (self.signs >> i) & 1 == 1)
    }

    /// Image of row `i` as a signed Pauli word.
    pub fn row_pauli(&self, i: usize) -> PauliString {
        let mut letters = Vec::with_capacity(self.n);
        for q in 0..self.n {
            let b = qubit_bit(q, self.n);
            let (xb, zb) = ((self.x[i] >> b) & 1, (self.z[i] >> b) & 1);
            letters.push(match (xb, zb) {
                (0, 0) => crate::quantum::Pauli::I,
                (1, 0) => crate::quantum::Pauli::X,
                (0, 1) => crate::quantum::Pauli::Z,
                _ => crate::quantum::Pauli::Y,
            });
        }
        let c = if (self.signs >> i) & 1 == 1 { -1.0 } else { 1.0 };
        PauliString::new(c, letters)
    }

    /// Rows pairwise satisfy the canonical commutation relations.
    pub fn is_symplectic(&self) -> bool {
        let m = 2 * self.n;
        for i in 0..m {
            for j in i + 1..m {
                let anti = (self.x[i] & self.z[j]).count_ones() + (self.z[i] & self.x[j]).count_ones();
                let expected = (j == i + 1 && i % 2 == 0) as u32;
                if anti % 2 != expected {
                    return false;
                }
            }
        }
        true
    }

    /// `U P U^dagger`.
    pub(crate) fn conjugate(&self, p: PauliOp) -> PauliOp {
        let mut out = PauliOp {
            phase: p.phase,
            x: 0,
            z: 0,
        };
        for q in 0..self.n {
            if (p.x >> qubit_bit(q, self.n)) & 1 == 1 {
                out = out.mul(self.row(2 * q));
            }
        }
        for q in 0..self.n {
            if (p.z >> qubit_bit(q, self.n)) & 1 == 1 {
                out = out.mul(self.row(2 * q + 1));
            }
        }
        out
    }

    /// `U -> G U` for a gate in {H, S, S^dagger, X, Z, CNOT}.
    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        crate::quantum::check_targets(&g.targets, self.n)?;
        if g.targets.len() != g.arity() {
            return Err(Error::ArityMismatch {
                arity: g.arity(),
                targets: g.targets.len(),
            });
        }
        let bit = |q: usize| qubit_bit(q, self.n);
        match g.kind {
            GateKind::H => self.h(bit(g.targets[0])),
            GateKind::S => self.s(bit(g.targets[0])),
            GateKind::Sdg => {
                let b = bit(g.targets[0]);
                self.s(b);
                self.s(b);
                self.s(b);
            }
            GateKind::Z => {
                let b = bit(g.targets[0]);
                self.s(b);
                self.s(b);
            }
            GateKind::X => {
                let b = bit(g.targets[0]);
                self.h(b);
                self.s(b);
                self.s(b);
                self.h(b);
            }
            GateKind::Cnot => self.cnot(bit(g.targets[0]), bit(g.targets[1])),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "gate {:?} is not a supported Clifford generator",
                    g.kind
                )))
            }
        }
        Ok(())
    }

    fn h(&mut self, b: usize) {
        for i in 0..2 * self.n {
            let (xb, zb) = ((self.x[i] >> b) & 1, (self.z[i] >> b) & 1);
            self.signs ^= (xb & zb) << i;
            self.x[i] = (self.x[i] & !(1 << b)) | (zb << b);
            self.z[i] = (self.z[i] & !(1 << b)) | (xb << b);
        }
    }

    fn s(&mut self, b: usize) {
        for i in 0..2 * self.n {
            let (xb, zb) = ((self.x[i] >> b) & 1, (self.z[i] >> b) & 1);
            self.signs ^= (xb & zb) << i;
            self.z[i] ^= xb << b;
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        for i in 0..2 * self.n {
            let xc = (self.x[i] >> c) & 1;
            let xt = (self.x[i] >> t) & 1;
            let zc = (self.z[i] >> c) & 1;
            let zt = (self.z[i] >> t) & 1;
            self.signs ^= (xc & zt & (xt ^ zc ^ 1)) << i;
            self.x[i] ^= xc << t;
            self.z[i] ^= zt << c;
        }
    }

    /// The element `other * self` (apply `self`, then `other`).
    pub fn then(&self, other: &CliffordElement) -> Result<CliffordElement> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut out = self.clone();
        out.signs = 0;
        for i in 0..2 * self.n {
            let img = other.conjugate(self.row(i));
            out.x[i] = img.x;
            out.z[i] = img.z;
            let sign = img.sign().expect("conjugate of a Hermitian Pauli is Hermitian");
            out.signs |= (sign as u64) << i;
        }
        Ok(out)
    }

    /// `U^dagger`. The symplectic part is `L M^T L` with `L` swapping X and Z of each qubit;
    /// signs are fixed by pushing each candidate row back through `U`.
    pub fn inverse(&self) -> CliffordElement {
        let n = self.n;
        let m = 2 * n;
        // Column `j` of the interleaved layout: qubit j/2, X if even else Z.
        let get = |row: usize, col: usize| -> u64 {
            let b = qubit_bit(col / 2, n);
            if col % 2 == 0 {
                (self.x[row] >> b) & 1
            } else {
                (self.z[row] >> b) & 1
            }
        };
        let mut x = vec![0u64; m];
        let mut z = vec![0u64; m];
        for i in 0..m {
            for j in 0..m {
                if get(j ^ 1, i ^ 1) == 1 {
                    let b = qubit_bit(j / 2, n);
                    if j % 2 == 0 {
                        x[i] |= 1 << b;
                    } else {
                        z[i] |= 1 << b;
                    }
                }
            }
        }
        let mut signs = 0u64;
        for i in 0..m {
            let img = self.conjugate(PauliOp::hermitian(x[i], z[i], false));
            if img.sign() == Some(true) {
                signs |= 1 << i;
            }
        }
        CliffordElement { n, x, z, signs }
    }

    /// Packed layout: each row as `2n` bits (x of qubits 0..n then z of qubits 0..n),
    /// followed by the `2n` sign bits; bit `k` of a bit vector sits in byte `k / 8` at
    /// position `k % 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.n;
        let row_bytes = packed_len(2 * n);
        let mut out = Vec::with_capacity(2 * n * row_bytes + row_bytes);
        for i in 0..2 * n {
            let mut bits = vec![0u8; row_bytes];
            for q in 0..n {
                let b = qubit_bit(q, n);
                set_packed(&mut bits, q, (self.x[i] >> b) & 1 == 1);
                set_packed(&mut bits, n + q, (self.z[i] >> b) & 1 == 1);
            }
            out.extend(bits);
        }
        let mut signs = vec![0u8; row_bytes];
        for i in 0..2 * n {
            set_packed(&mut signs, i, (self.signs >> i) & 1 == 1);
        }
        out.extend(signs);
        out
    }

    pub fn serialized_len(n: usize) -> usize {
        (2 * n + 1) * packed_len(2 * n)
    }

    pub fn from_bytes(n: usize, bytes: &[u8]) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(Error::Format(format!("qubit count {n} out of range")));
        }
        if bytes.len() != Self::serialized_len(n) {
            return Err(Error::Format(format!(
                "tableau needs {} bytes, got {}",
                Self::serialized_len(n),
                bytes.len()
            )));
        }
        let row_bytes = packed_len(2 * n);
        let mut x = vec![0u64; 2 * n];
        let mut z = vec![0u64; 2 * n];
        for i in 0..2 * n {
            let bits = &bytes[i * row_bytes..(i + 1) * row_bytes];
            for q in 0..n {
                let b = qubit_bit(q, n);
                x[i] |= (get_packed(bits, q) as u64) << b;
                z[i] |= (get_packed(bits, n + q) as u64) << b;
            }
            if (2 * n..8 * row_bytes).any(|k| get_packed(bits, k)) {
                return Err(Error::Format("nonzero padding in tableau row".into()));
            }
        }
        let sign_bytes = &bytes[2 * n * row_bytes..];
        let mut signs = 0u64;
        for i in 0..2 * n {
            signs |= (get_packed(sign_bytes, i) as u64) << i;
        }
        Self::from_rows(n, x, z, signs)
    }
}

pub(crate) fn packed_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

pub(crate) fn set_packed(bytes: &mut [u8], k: usize, v: bool) {
    if v {
        bytes[k / 8] |= 1 << (k % 8);
    }
}

pub(crate) fn get_packed(bytes: &[u8], k: usize) -> bool {
    (bytes[k / 8] >> (k % 8)) & 1 == 1
}
