//! Autoregressive transformer wavefunction `psi(s) = sqrt(p(s)) e^{i phase(s)}`.
//!
//! The input `(0, s_1, ..., s_n)` is embedded with a token table plus a learned position
//! table, then passed through causal self-attention layers. Each layer is
//!
//! ```text
//! y  = norm(x + concat_h(softmax(q_h k_h^T / sqrt(D/H)) v_h) O)
//! x' = norm(y + relu(y W + b))
//! ```
//!
//! where each `norm` is a layer normalization with its own gain and shift.
//!
//! The output at position `j < n` gives the logit of `p(s_{j+1} = 1 | s_1..s_j)`; a separate
//! linear head over all `n + 1` outputs gives the phase. Parameters are one flat `f64`
//! vector; see [`Layout`] for the ordering.

mod checkpoint;
mod transformer;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::quantum::{BitString, StateVector, MAX_QUBITS};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Architecture {
    pub n: usize,
    pub layers: usize,
    pub heads: usize,
    pub dim: usize,
}

impl Architecture {
    pub fn new(n: usize, layers: usize, heads: usize, dim: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(Error::InvalidParameter(format!("qubit count {n} out of range")));
        }
        if heads == 0 || dim == 0 || dim % heads != 0 {
            return Err(Error::InvalidParameter(format!(
                "embedding dimension {dim} must be a positive multiple of the head count {heads}"
            )));
        }
        Ok(Self {
            n,
            layers,
            heads,
            dim,
        })
    }

    /// Two layers, four heads, eight dimensions.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, 2, 4, 8)
    }

    pub fn head_dim(&self) -> usize {
        self.dim / self.heads
    }
}

/// Which output heads a network carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Both,
    AmplitudeOnly,
    PhaseOnly,
}

impl Mode {
    pub fn has_amplitude(self) -> bool {
        self != Mode::PhaseOnly
    }

    pub fn has_phase(self) -> bool {
        self != Mode::AmplitudeOnly
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Mode::Both => 0,
            Mode::AmplitudeOnly => 1,
            Mode::PhaseOnly => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Mode::Both),
            1 => Ok(Mode::AmplitudeOnly),
            2 => Ok(Mode::PhaseOnly),
            t => Err(Error::Format(format!("unknown network mode {t}"))),
        }
    }
}

/// Offsets of one transformer layer; every matrix is `D x D` row-major (input index major).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerOffsets {
    pub query: usize,
    pub key: usize,
    pub value: usize,
    pub output: usize,
    pub linear: usize,
    pub bias: usize,
    /// Gain then shift of the normalization after attention.
    pub norm_attention: usize,
    /// Gain then shift of the normalization after the linear block.
    pub norm_linear: usize,
}

/// Flat parameter layout, in order: token embedding `2 x D`, position embedding
/// `(n + 1) x D`, per layer `Q, K, V, O, W`, `b`, then two normalizations of `2D` each, logit head `D + 1` (weights then bias),
/// phase head `(n + 1) D + 1`. Heads absent from the mode take no space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub token: usize,
    pub position: usize,
    pub layers: Vec<LayerOffsets>,
    pub logit: Option<usize>,
    pub phase: Option<usize>,
    pub body_len: usize,
    pub total: usize,
}

impl Layout {
    pub fn new(arch: &Architecture, mode: Mode) -> Self {
        let d = arch.dim;
        let mut at = 0;
        let mut take = |len: usize| {
            let start = at;
            at += len;
            start
        };
        let token = take(2 * d);
        let position = take((arch.n + 1) * d);
        let layers = (0..arch.layers)
            .map(|_| LayerOffsets {
                query: take(d * d),
                key: take(d * d),
                value: take(d * d),
                output: take(d * d),
                linear: take(d * d),
                bias: take(d),
                norm_attention: take(2 * d),
                norm_linear: take(2 * d),
            })
            .collect();
        let body_len = take(0);
        let logit = mode.has_amplitude().then(|| take(d + 1));
        let phase = mode.has_phase().then(|| take((arch.n + 1) * d + 1));
        let total = take(0);
        Self {
            token,
            position,
            layers,
            logit,
            phase,
            body_len,
            total,
        }
    }
}

pub fn param_count(arch: &Architecture, mode: Mode) -> usize {
    Layout::new(arch, mode).total
}

/// `log sqrt p(s)` and the unwrapped phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveAmplitude {
    pub log_sqrt_p: f64,
    pub phase_raw: f64,
}

impl WaveAmplitude {
    /// Phase wrapped into `[0, 2 pi)`.
    pub fn phase(&self) -> f64 {
        self.phase_raw.rem_euclid(TAU)
    }

    pub fn psi(&self) -> Complex64 {
        Complex64::from_polar(self.log_sqrt_p.exp(), self.phase_raw)
    }

    pub fn log_psi(&self) -> Complex64 {
        Complex64::new(self.log_sqrt_p, self.phase_raw)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nqs {
    arch: Architecture,
    mode: Mode,
    layout: Layout,
    params: Vec<f64>,
}

impl Nqs {
    /// Body weights uniform in `[-scale, scale]`, normalization gains 1 and shifts 0; output
    /// heads start at zero so the initial state is the uniform superposition with zero phase.
    pub fn init<R: Rng + ?Sized>(arch: Architecture, mode: Mode, rng: &mut R, scale: f64) -> Result<Self> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("init scale {scale}")));
        }
        let layout = Layout::new(&arch, mode);
        let mut params = vec![0.0; layout.total];
        if scale > 0.0 {
            for p in params[..layout.body_len].iter_mut() {
                *p = rng.gen_range(-scale..=scale);
            }
        }
        for off in &layout.layers {
            for at in [off.norm_attention, off.norm_linear] {
                params[at..at + arch.dim].fill(1.0);
                params[at + arch.dim..at + 2 * arch.dim].fill(0.0);
            }
        }
        Ok(Self {
            arch,
            mode,
            layout,
            params,
        })
    }

    pub fn from_params(arch: Architecture, mode: Mode, params: Vec<f64>) -> Result<Self> {
        let layout = Layout::new(&arch, mode);
        if params.len() != layout.total {
            return Err(Error::DimensionMismatch {
                expected: layout.total,
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        Ok(Self {
            arch,
            mode,
            layout,
            params,
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.arch.n
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward(&self, s: u64) -> WaveAmplitude {
        transformer::evaluate(self, s)
    }

    pub fn forward_bits(&self, s: &BitString) -> Result<WaveAmplitude> {
        if s.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: s.len(),
            });
        }
        Ok(self.forward(s.value()))
    }

    /// `p(s_{j+1} = 1 | s_1..s_j)` for `j = 0..n`. Phase-only networks report 1/2.
    pub fn conditionals(&self, s: u64) -> Vec<f64> {
        transformer::conditionals(self, s)
    }

    /// Adds `seed_amp * d log sqrt p(s) + seed_phase * d phase(s)` into `grad`.
    pub fn backward(&self, s: u64, seed_amp: f64, seed_phase: f64, grad: &mut [f64]) {
        transformer::backward(self, s, seed_amp, seed_phase, grad);
    }

    /// `d ln psi(s) = d log sqrt p(s) + i d phase(s)` per parameter.
    pub fn grad_log_psi(&self, s: u64) -> Vec<Complex64> {
        let mut re = vec![0.0; self.params.len()];
        let mut im = vec![0.0; self.params.len()];
        self.backward(s, 1.0, 0.0, &mut re);
        self.backward(s, 0.0, 1.0, &mut im);
        re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
    }

    /// `sum_s seed(s) . d(log sqrt p, phase)(s)` over distinct strings, reduced in key order.
    pub fn weighted_gradient(&self, seeds: &BTreeMap<u64, (f64, f64)>) -> Vec<f64> {
        let entries: Vec<(u64, (f64, f64))> = seeds.iter().map(|(&s, &w)| (s, w)).collect();
        let len = self.params.len();
        let parts: Vec<Vec<f64>> = entries
            .par_chunks(8)
            .map(|chunk| {
                let mut g = vec![0.0; len];
                for &(s, (a, b)) in chunk {
                    self.backward(s, a, b, &mut g);
                }
                g
            })
            .collect();
        let mut total = vec![0.0; len];
        for part in parts {
            total.iter_mut().zip(part).for_each(|(t, v)| *t += v);
        }
        total
    }

    pub fn forward_many(&self, strings: &[u64]) -> Vec<WaveAmplitude> {
        strings.par_iter().map(|&s| self.forward(s)).collect()
    }

    /// Exact ancestral sampling; returns `count` draws grouped by string.
    ///
    /// Draws sharing a prefix share one network evaluation per level.
    pub fn sample_counts<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<BTreeMap<u64, usize>> {
        if count == 0 {
            return Err(Error::Empty("sample count"));
        }
        let n = self.n();
        let mut level: BTreeMap<u64, usize> = BTreeMap::from([(0u64, count)]);
        for j in 0..n {
            let mut next = BTreeMap::new();
            for (prefix, c) in level {
                let p1 = transformer::next_conditional(self, prefix, j);
                let ones = (0..c).filter(|_| rng.gen::<f64>() < p1).count();
                if ones > 0 {
                    next.insert((prefix << 1) | 1, ones);
                }
                if c > ones {
                    next.insert(prefix << 1, c - ones);
                }
            }
            level = next;
        }
        Ok(level)
    }

    /// `count` independent draws in random order.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<BitString>> {
        let counts = self.sample_counts(count, rng)?;
        let mut out: Vec<BitString> = counts
            .into_iter()
            .flat_map(|(s, c)| std::iter::repeat(BitString::new(self.n(), s)).take(c))
            .collect();
        out.shuffle(rng);
        Ok(out)
    }

    /// `p(s)` for every basis string.
    pub fn probabilities(&self) -> Vec<f64> {
        let all: Vec<u64> = (0..1u64 << self.n()).collect();
        self.forward_many(&all)
            .into_iter()
            .map(|w| (2.0 * w.log_sqrt_p).exp())
            .collect()
    }

    /// The full wavefunction; for an amplitude-only network the phase is zero.
    pub fn to_amplitudes(&self) -> Vec<Complex64> {
        let all: Vec<u64> = (0..1u64 << self.n()).collect();
        self.forward_many(&all).into_iter().map(|w| w.psi()).collect()
    }

    pub fn to_state_vector(&self) -> Result<StateVector> {
        StateVector::normalized(self.to_amplitudes())
    }
}

#[cfg(test)]
mod tests;
