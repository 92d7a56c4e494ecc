use num_complex::Complex64;

use crate::{Error, Result};

type C = Complex64;

/// A completely positive, trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    arity: usize,
    operators: Vec<Vec<C>>,
}

impl KrausChannel {
    /// Builds a channel from row-major `2^arity x 2^arity` operators.
    ///
    /// Rejects operators whose completeness relation deviates from the identity by more than
    /// 1e-10.
    pub fn new(arity: usize, operators: Vec<Vec<C>>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::Empty("Kraus operators"));
        }
        let dim = 1usize << arity;
        for op in &operators {
            if op.len() != dim * dim {
                return Err(Error::DimensionMismatch {
                    expected: dim * dim,
                    found: op.len(),
                });
            }
        }
        let ch = Self { arity, operators };
        let dev = ch.completeness_error();
        if dev > 1e-10 {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(ch)
    }

    pub fn identity(arity: usize) -> Self {
        let dim = 1usize << arity;
        let mut id = vec![C::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            id[i * dim + i] = C::new(1.0, 0.0);
        }
        Self {
            arity,
            operators: vec![id],
        }
    }

    /// Single-qubit amplitude damping where `p` is the probability that `|1>` survives:
    /// `rho_11 -> p rho_11`, `rho_01 -> sqrt(p) rho_01`.
    pub fn amplitude_damping(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "amplitude damping p = {p} outside [0, 1]"
            )));
        }
        let z = C::new(0.0, 0.0);
        let k0 = vec![C::new(1.0, 0.0), z, z, C::new(p.sqrt(), 0.0)];
        let k1 = vec![z, C::new((1.0 - p).sqrt(), 0.0), z, z];
        Self::new(1, vec![k0, k1])
    }

    /// `rho -> f rho + (1 - f) I / 2^arity`, valid for `f` in `[0, 1]`.
    ///
    /// Realised with Pauli Kraus operators: the uniform Pauli twirl equals `I/d` times the trace.
    pub fn depolarizing(arity: usize, f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing f = {f} outside [0, 1]"
            )));
        }
        let dim = 1usize << arity;
        let count = dim * dim;
        let single = [
            [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)],
            [C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)],
            [C::new(0.0, 0.0), C::new(0.0, -1.0), C::new(0.0, 1.0), C::new(0.0, 0.0)],
            [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(-1.0, 0.0)],
        ];
        let mut operators = Vec::with_capacity(count);
        for label in 0..count {
            let mut op = vec![C::new(1.0, 0.0)];
            for q in 0..arity {
                let letter = (label >> (2 * (arity - 1 - q))) & 3;
                op = kron(&op, &single[letter]);
            }
            let weight = if label == 0 {
                f + (1.0 - f) / count as f64
            } else {
                (1.0 - f) / count as f64
            };
            let w = weight.sqrt();
            operators.push(op.into_iter().map(|v| v * w).collect());
        }
        Self::new(arity, operators)
    }

    /// `self^{(x) copies}` acting on `copies * arity` qubits.
    pub fn tensor_power(&self, copies: usize) -> Self {
        let mut ops: Vec<Vec<C>> = vec![vec![C::new(1.0, 0.0)]];
        for _ in 0..copies {
            let mut next = Vec::with_capacity(ops.len() * self.operators.len());
            for a in &ops {
                for b in &self.operators {
                    next.push(kron(a, b));
                }
            }
            ops = next;
        }
        Self {
            arity: self.arity * copies,
            operators: ops,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn operators(&self) -> &[Vec<C>] {
        &self.operators
    }

    /// Largest entry of `sum_k K_k^dagger K_k - I`.
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut v = C::new(0.0, 0.0);
                for k in &self.operators {
                    for r in 0..d {
                        v += k[r * d + i].conj() * k[r * d + j];
                    }
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }
}

fn kron(a: &[C], b: &[C]) -> Vec<C> {
    let da = (a.len() as f64).sqrt().round() as usize;
    let db = (b.len() as f64).sqrt().round() as usize;
    let d = da * db;
    let mut out = vec![C::new(0.0, 0.0); d * d];
    for i in 0..da {
        for j in 0..da {
            let av = a[i * da + j];
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k) * d + (j * db + l)] = av * b[k * db + l];
                }
            }
        }
    }
    out
}
