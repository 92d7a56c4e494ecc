//! Losses, gradient estimators, the optimizer and the training protocols.
//!
//! Four protocols are supported:
//!
//! * `nnqst`: cross-entropy on local Pauli-basis measurement data;
//! * `nsqst`: the shadow-estimated infidelity, overlaps by Monte Carlo over model samples;
//! * `nsqst_pretrain`: an amplitude network fitted to computational-basis data, then frozen
//!   while a phase network minimizes the shadow loss;
//! * `hybrid`: as above, but the phase loss uses the sparse state `sqrt(P(s)) e^{i phase(s)}`
//!   over the sampled support with exact sums.

mod adam;
mod ansatz;
mod nnqst;
mod overlap;
mod state;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use ansatz::{exact_infidelity, Ansatz};
pub use nnqst::{basis_expansion, nnqst_loss_grad, nnqst_prob, NnqstStep, MAX_ROTATED, PROB_FLOOR};
pub use overlap::{
    exact_estimate, hybrid_estimate, mc_overlap, sampled_estimate, Estimate, OverlapObjective, AMPLITUDE_GUARD,
};
pub use state::{read_trainer_state, write_trainer_state, TrainerState, STATE_MAGIC, STATE_VERSION};

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::clifford::StabilizerState;
use crate::nqs::{Architecture, Mode, Nqs};
use crate::quantum::{PauliBasis, StateVector};
use crate::rng::{substream, Stream};
use crate::shadows::{collect_shadows, noise_free_f, NoiseModel};
use crate::targets::nnqst_basis_set;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Nnqst,
    Nsqst,
    NsqstPretrain,
    Hybrid,
}

impl Protocol {
    pub fn stages(self) -> &'static [Stage] {
        match self {
            Protocol::Nnqst => &[Stage::Nnqst],
            Protocol::Nsqst => &[Stage::Nsqst],
            Protocol::NsqstPretrain => &[Stage::Pretrain, Stage::Nsqst],
            Protocol::Hybrid => &[Stage::Pretrain, Stage::Hybrid],
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Protocol::Nnqst => 0,
            Protocol::Nsqst => 1,
            Protocol::NsqstPretrain => 2,
            Protocol::Hybrid => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Protocol::Nnqst),
            1 => Ok(Protocol::Nsqst),
            2 => Ok(Protocol::NsqstPretrain),
            3 => Ok(Protocol::Hybrid),
            t => Err(Error::Format(format!("unknown protocol {t}"))),
        }
    }

    fn split(self) -> bool {
        matches!(self, Protocol::NsqstPretrain | Protocol::Hybrid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Cross-entropy on the local-basis data set.
    Nnqst,
    /// Cross-entropy of the amplitude network on computational-basis data.
    Pretrain,
    Nsqst,
    Hybrid,
}

impl Stage {
    fn code(self) -> u64 {
        match self {
            Stage::Nnqst => 0,
            Stage::Pretrain => 1,
            Stage::Nsqst => 2,
            Stage::Hybrid => 3,
        }
    }
}

/// Which depolarizing strength inverts the measurement channel in the loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FStrategy {
    /// `1 / (2^n + 1)` whatever the noise.
    NoiseFree,
    /// The closed form of the configured noise model.
    Analytic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub protocol: Protocol,
    /// Steps of the shadow-based stage.
    pub iterations: usize,
    pub shadows_per_iter: usize,
    pub mc_samples: usize,
    pub samples_per_basis: usize,
    pub batch_size: usize,
    pub epochs: usize,
    /// Learning rate of the cross-entropy stages.
    pub nnqst_lr: f64,
    /// Learning rate of the shadow-based stages.
    pub nsqst_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub noise: NoiseModel,
    pub f_strategy: FStrategy,
    pub init_scale: f64,
    pub layers: usize,
    pub heads: usize,
    pub dim: usize,
    /// Replace Monte-Carlo overlaps with exhaustive sums.
    pub exact_overlaps: bool,
    /// Collect one shadow set up front instead of a fresh one per iteration.
    pub reuse_shadows: bool,
    /// Record the exact infidelity after every step.
    pub track_infidelity: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::Nsqst,
            iterations: 2000,
            shadows_per_iter: 100,
            mc_samples: 5000,
            samples_per_basis: 512,
            batch_size: 128,
            epochs: 200,
            nnqst_lr: 5e-3,
            nsqst_lr: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            noise: NoiseModel::None,
            f_strategy: FStrategy::NoiseFree,
            init_scale: DEFAULT_INIT_SCALE,
            layers: 2,
            heads: 4,
            dim: 8,
            exact_overlaps: false,
            reuse_shadows: false,
            track_infidelity: true,
        }
    }
}

/// Half-width of the uniform distribution the network bodies start from.
pub const DEFAULT_INIT_SCALE: f64 = 0.1;

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("shadows_per_iter", self.shadows_per_iter),
            ("mc_samples", self.mc_samples),
            ("samples_per_basis", self.samples_per_basis),
            ("batch_size", self.batch_size),
        ];
        if let Some((name, _)) = counts.iter().find(|c| c.1 == 0) {
            return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
        }
        self.adam(self.nnqst_lr).validate()?;
        self.adam(self.nsqst_lr).validate()?;
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("init scale {}", self.init_scale)));
        }
        Ok(())
    }

    pub fn architecture(&self, n: usize) -> Result<Architecture> {
        Architecture::new(n, self.layers, self.heads, self.dim)
    }

    fn adam(&self, lr: f64) -> AdamConfig {
        AdamConfig {
            lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }

    /// Depolarizing strength used by the shadow loss.
    pub fn depolarizing_strength(&self, n: usize) -> Result<f64> {
        match self.f_strategy {
            FStrategy::NoiseFree => Ok(noise_free_f(n)),
            FStrategy::Analytic => self.noise.analytic_f(n).ok_or_else(|| {
                Error::InvalidParameter("noise model has no closed-form depolarizing strength".into())
            }),
        }
    }
}

/// One line of the metrics stream. Record 0 of a stage describes the starting point; record
/// `t` is taken after the `t`-th update and carries the loss estimated during that update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub stage: Stage,
    pub iter: u64,
    pub loss_est: Option<f64>,
    pub exact_infid: Option<f64>,
    pub excluded_samples: u64,
    pub elapsed_ms: u64,
}

/// Reshuffled mini-batches over a fixed data set, one permutation per epoch.
struct Schedule {
    len: usize,
    batch: usize,
    seed: u64,
    salt: u64,
    cached: Option<(u64, Vec<usize>)>,
}

impl Schedule {
    fn steps_per_epoch(&self) -> u64 {
        self.len.div_ceil(self.batch) as u64
    }

    fn batch_at(&mut self, t: u64) -> Vec<usize> {
        let per = self.steps_per_epoch();
        let (epoch, k) = (t / per, (t % per) as usize);
        if self.cached.as_ref().map(|c| c.0) != Some(epoch) {
            let mut order: Vec<usize> = (0..self.len).collect();
            order.shuffle(&mut substream(self.seed, Stream::Shuffle, epoch, self.salt));
            self.cached = Some((epoch, order));
        }
        let order = &self.cached.as_ref().unwrap().1;
        let end = ((k + 1) * self.batch).min(self.len);
        order[k * self.batch..end].to_vec()
    }
}

/// `count` Born-rule samples of `target` measured in `basis`.
pub fn measurement_samples(
    target: &StateVector,
    basis: &PauliBasis,
    count: usize,
    seed: u64,
    basis_index: u64,
    salt: u64,
) -> Result<Vec<u64>> {
    let probs = target.rotate_to_basis(basis)?.probabilities();
    let mut rng = substream(seed, Stream::Dataset, basis_index, salt);
    Ok((0..count)
        .map(|_| crate::quantum::sample_index(probs.iter().copied(), &mut rng))
        .collect())
}

/// Training data as `(outcome, basis index)` pairs.
struct Dataset {
    bases: Vec<PauliBasis>,
    records: Vec<(u64, usize)>,
}

impl Dataset {
    /// `samples_per_basis` outcomes in each of the `4n - 3` local bases.
    fn local(target: &StateVector, cfg: &TrainConfig) -> Result<Self> {
        let bases = nnqst_basis_set(target.n())?;
        let mut records = Vec::with_capacity(bases.len() * cfg.samples_per_basis);
        for (b, basis) in bases.iter().enumerate() {
            let samples = measurement_samples(target, basis, cfg.samples_per_basis, cfg.seed, b as u64, 0)?;
            records.extend(samples.into_iter().map(|s| (s, b)));
        }
        Ok(Self { bases, records })
    }

    /// The same number of outcomes, all in the computational basis.
    fn computational(target: &StateVector, cfg: &TrainConfig) -> Result<Self> {
        let n = target.n();
        let count = nnqst_basis_set(n)?.len() * cfg.samples_per_basis;
        let basis = PauliBasis::all_z(n);
        let samples = measurement_samples(target, &basis, count, cfg.seed, 0, 1)?;
        Ok(Self {
            bases: vec![basis],
            records: samples.into_iter().map(|s| (s, 0)).collect(),
        })
    }
}

/// Fits an amplitude-only network to computational-basis samples with the cross-entropy
/// loss; returns the mean batch loss of every epoch.
pub fn pretrain_amplitudes(net: &mut Nqs, samples: &[u64], cfg: &TrainConfig) -> Result<Vec<f64>> {
    if net.mode() != Mode::AmplitudeOnly {
        return Err(Error::InvalidParameter("pre-training needs an amplitude-only network".into()));
    }
    if samples.is_empty() {
        return Err(Error::Empty("computational-basis data set"));
    }
    cfg.validate()?;
    let basis = PauliBasis::all_z(net.n());
    let mut schedule = Schedule {
        len: samples.len(),
        batch: cfg.batch_size,
        seed: cfg.seed,
        salt: Stage::Pretrain.code(),
        cached: None,
    };
    let adam_cfg = cfg.adam(cfg.nnqst_lr);
    let mut adam = AdamState::new(net.params().len());
    let per = schedule.steps_per_epoch();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs as u64 {
        let mut total = 0.0;
        for k in 0..per {
            let batch: Vec<(u64, &PauliBasis)> = schedule
                .batch_at(epoch * per + k)
                .into_iter()
                .map(|i| (samples[i], &basis))
                .collect();
            let step = nnqst_loss_grad(net, &batch)?;
            adam_step(&mut adam, net.params_mut(), &step.grad, &adam_cfg)?;
            total += step.loss;
        }
        history.push(total / per as f64);
    }
    Ok(history)
}

/// Drives one run of a protocol step by step; every random draw is keyed by the stage and
/// step, so a run continued from a saved state reproduces an uninterrupted one exactly.
pub struct Trainer<'t> {
    config: TrainConfig,
    target: &'t StateVector,
    ansatz: Ansatz,
    stage_index: usize,
    iteration: u64,
    adam: AdamState,
    data: Option<(Dataset, Schedule)>,
    reused: Option<Vec<StabilizerState>>,
    pinned: Option<Vec<StabilizerState>>,
    support: Option<Vec<(u64, f64)>>,
    clock: Instant,
}

impl<'t> Trainer<'t> {
    /// Fresh networks drawn from the `Init` substreams.
    pub fn new(config: TrainConfig, target: &'t StateVector) -> Result<Self> {
        config.validate()?;
        let arch = config.architecture(target.n())?;
        let init = |mode, k| Nqs::init(arch, mode, &mut substream(config.seed, Stream::Init, 0, k), config.init_scale);
        let ansatz = if config.protocol.split() {
            Ansatz::split(init(Mode::AmplitudeOnly, 1)?, init(Mode::PhaseOnly, 2)?)?
        } else {
            Ansatz::joint(init(Mode::Both, 0)?)?
        };
        let state = TrainerState {
            protocol: config.protocol,
            stage_index: 0,
            iteration: 0,
            adam: AdamState::new(0),
        };
        Self::assemble(config, target, ansatz, state, true)
    }

    /// Continues from saved networks and optimizer state.
    pub fn resume(config: TrainConfig, target: &'t StateVector, ansatz: Ansatz, state: TrainerState) -> Result<Self> {
        config.validate()?;
        if state.protocol != config.protocol {
            return Err(Error::InvalidParameter("saved state belongs to another protocol".into()));
        }
        if ansatz.n() != target.n() || config.protocol.split() != matches!(ansatz, Ansatz::Split { .. }) {
            return Err(Error::InvalidParameter("checkpoint does not fit the target or protocol".into()));
        }
        Self::assemble(config, target, ansatz, state, false)
    }

    fn assemble(
        config: TrainConfig,
        target: &'t StateVector,
        ansatz: Ansatz,
        state: TrainerState,
        fresh: bool,
    ) -> Result<Self> {
        let mut t = Self {
            config,
            target,
            ansatz,
            stage_index: state.stage_index,
            iteration: state.iteration,
            adam: AdamState::new(0),
            data: None,
            reused: None,
            pinned: None,
            support: None,
            clock: Instant::now(),
        };
        t.enter_stage()?;
        if !fresh {
            if state.adam.len() != t.active().params().len() {
                return Err(Error::DimensionMismatch {
                    expected: t.active().params().len(),
                    found: state.adam.len(),
                });
            }
            t.adam = state.adam;
        }
        Ok(t)
    }

    pub fn stage(&self) -> Stage {
        self.config.protocol.stages()[self.stage_index]
    }

    /// Iterations completed in the current stage.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn ansatz(&self) -> &Ansatz {
        &self.ansatz
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn state(&self) -> TrainerState {
        TrainerState {
            protocol: self.config.protocol,
            stage_index: self.stage_index,
            iteration: self.iteration,
            adam: self.adam.clone(),
        }
    }

    /// Pins the hybrid support to `(s, P(s))` pairs instead of sampling it every step.
    pub fn set_support(&mut self, table: Vec<(u64, f64)>) {
        self.support = Some(table);
    }

    /// Uses the same recorded shadows in every iteration instead of measuring afresh.
    pub fn set_shadows(&mut self, states: Vec<StabilizerState>) -> Result<()> {
        if states.is_empty() {
            return Err(Error::Empty("shadow set"));
        }
        if let Some(s) = states.iter().find(|s| s.n() != self.target.n()) {
            return Err(Error::DimensionMismatch {
                expected: self.target.n(),
                found: s.n(),
            });
        }
        self.pinned = Some(states);
        Ok(())
    }

    fn active(&self) -> &Nqs {
        match (self.stage(), &self.ansatz) {
            (Stage::Pretrain, Ansatz::Split { amplitude, .. }) => amplitude,
            _ => self.ansatz.trainable(),
        }
    }

    fn active_mut(&mut self) -> &mut Nqs {
        match (self.stage(), &mut self.ansatz) {
            (Stage::Pretrain, Ansatz::Split { amplitude, .. }) => amplitude,
            (_, a) => a.trainable_mut(),
        }
    }

    fn enter_stage(&mut self) -> Result<()> {
        self.adam = AdamState::new(self.active().params().len());
        self.data = None;
        self.reused = None;
        let salt = self.stage().code();
        let dataset = match self.stage() {
            Stage::Nnqst => Some(Dataset::local(self.target, &self.config)?),
            Stage::Pretrain => Some(Dataset::computational(self.target, &self.config)?),
            Stage::Nsqst | Stage::Hybrid => None,
        };
        if let Some(d) = dataset {
            let schedule = Schedule {
                len: d.records.len(),
                batch: self.config.batch_size,
                seed: self.config.seed,
                salt,
                cached: None,
            };
            self.data = Some((d, schedule));
        } else if self.config.reuse_shadows {
            let set = collect_shadows(
                self.target,
                self.config.shadows_per_iter,
                &self.config.noise,
                self.config.seed,
                0,
            )?;
            self.reused = Some(set.states());
        }
        Ok(())
    }

    /// Number of iterations in the current stage: epochs for the cross-entropy stages.
    pub fn stage_len(&self) -> u64 {
        match &self.data {
            Some(_) => self.config.epochs as u64,
            None => self.config.iterations as u64,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.stage_index + 1 == self.config.protocol.stages().len() && self.iteration >= self.stage_len()
    }

    fn record(&self, loss_est: Option<f64>, excluded: usize) -> Result<Metrics> {
        let exact_infid = if self.config.track_infidelity {
            Some(exact_infidelity(&self.ansatz, self.target)?)
        } else {
            None
        };
        Ok(Metrics {
            stage: self.stage(),
            iter: self.iteration,
            loss_est,
            exact_infid,
            excluded_samples: excluded as u64,
            elapsed_ms: self.clock.elapsed().as_millis() as u64,
        })
    }

    /// The record describing the current parameters before any further update.
    pub fn snapshot(&self) -> Result<Metrics> {
        self.record(None, 0)
    }

    /// Performs one iteration: a full pass over the data set in the cross-entropy stages, a
    /// single update otherwise. Returns its record, followed by the starting record of the
    /// next stage when this iteration completed a stage.
    pub fn step(&mut self) -> Result<Vec<Metrics>> {
        if self.is_finished() {
            return Ok(Vec::new());
        }
        let t = self.iteration;
        let (loss, excluded) = match self.stage() {
            Stage::Nnqst | Stage::Pretrain => self.epoch(t)?,
            Stage::Nsqst | Stage::Hybrid => {
                let (loss, grad, excluded) = match self.stage() {
                    Stage::Nsqst => self.shadow_step(t)?,
                    _ => self.hybrid_step(t)?,
                };
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss(t as usize));
                }
                self.update(&grad, self.config.nsqst_lr)?;
                (loss, excluded)
            }
        };
        self.iteration += 1;
        let mut out = vec![self.record(Some(loss), excluded)?];
        if self.iteration >= self.stage_len() && self.stage_index + 1 < self.config.protocol.stages().len() {
            self.stage_index += 1;
            self.iteration = 0;
            self.enter_stage()?;
            log::info!("entering stage {:?}", self.stage());
            out.push(self.snapshot()?);
        }
        Ok(out)
    }

    fn update(&mut self, grad: &[f64], lr: f64) -> Result<()> {
        let cfg = self.config.adam(lr);
        let mut adam = std::mem::replace(&mut self.adam, AdamState::new(0));
        let res = adam_step(&mut adam, self.active_mut().params_mut(), grad, &cfg);
        self.adam = adam;
        res
    }

    /// Runs to completion, passing every record to `sink`.
    pub fn run<F: FnMut(&Metrics) -> Result<()>>(&mut self, mut sink: F) -> Result<()> {
        if self.stage_index == 0 && self.iteration == 0 {
            sink(&self.snapshot()?)?;
        }
        while !self.is_finished() {
            for m in self.step()? {
                if m.iter % 100 == 0 {
                    log::debug!("{:?} {}: loss {:?} infidelity {:?}", m.stage, m.iter, m.loss_est, m.exact_infid);
                }
                sink(&m)?;
            }
        }
        Ok(())
    }

    /// One sweep over the shuffled data set; returns the mean batch loss and the number of
    /// clamped probabilities.
    fn epoch(&mut self, epoch: u64) -> Result<(f64, usize)> {
        let per = self.data.as_ref().expect("cross-entropy stage has data").1.steps_per_epoch();
        let (mut total, mut clamped) = (0.0, 0);
        for k in 0..per {
            let idx = self.data.as_mut().expect("cross-entropy stage has data").1.batch_at(epoch * per + k);
            let data = &self.data.as_ref().expect("cross-entropy stage has data").0;
            let batch: Vec<(u64, &PauliBasis)> = idx
                .into_iter()
                .map(|i| {
                    let (s, b) = data.records[i];
                    (s, &data.bases[b])
                })
                .collect();
            let step = nnqst_loss_grad(self.active(), &batch)?;
            if !step.loss.is_finite() {
                return Err(Error::NonFiniteLoss(epoch as usize));
            }
            self.update(&step.grad, self.config.nnqst_lr)?;
            total += step.loss;
            clamped += step.clamped;
        }
        Ok((total / per as f64, clamped))
    }

    fn shadow_states(&self, t: u64) -> Result<Vec<StabilizerState>> {
        match self.pinned.as_ref().or(self.reused.as_ref()) {
            Some(states) => Ok(states.clone()),
            None => Ok(collect_shadows(
                self.target,
                self.config.shadows_per_iter,
                &self.config.noise,
                self.config.seed,
                t,
            )?
            .states()),
        }
    }

    fn shadow_step(&mut self, t: u64) -> Result<(f64, Vec<f64>, usize)> {
        let states = self.shadow_states(t)?;
        let f = self.config.depolarizing_strength(self.target.n())?;
        let objective = OverlapObjective::shadows(&states, f)?;
        let est = if self.config.exact_overlaps {
            exact_estimate(&self.ansatz, &objective)?
        } else {
            let mut rng = substream(self.config.seed, Stream::MonteCarlo, t, 0);
            let samples = self.ansatz.sample_counts(self.config.mc_samples, &mut rng)?;
            sampled_estimate(&self.ansatz, &objective, &samples)?
        };
        Ok((est.loss, est.grad, est.excluded))
    }

    /// Support of the sparse state: the pinned table, or the distinct model samples with
    /// their model probabilities renormalized.
    fn hybrid_support(&self, t: u64) -> Result<Vec<(u64, f64)>> {
        if let Some(table) = &self.support {
            return Ok(table.clone());
        }
        let amplitude = self.ansatz.sampler();
        let mut rng = substream(self.config.seed, Stream::MonteCarlo, t, 0);
        let counts = amplitude.sample_counts(self.config.mc_samples, &mut rng)?;
        let strings: Vec<u64> = counts.keys().copied().collect();
        let probs: Vec<f64> = amplitude
            .forward_many(&strings)
            .into_iter()
            .map(|w| (2.0 * w.log_sqrt_p).exp())
            .collect();
        let total: f64 = probs.iter().sum();
        Ok(strings.into_iter().zip(probs).map(|(s, p)| (s, p / total)).collect())
    }

    fn hybrid_step(&mut self, t: u64) -> Result<(f64, Vec<f64>, usize)> {
        let table = self.hybrid_support(t)?;
        let states = self.shadow_states(t)?;
        let f = self.config.depolarizing_strength(self.target.n())?;
        let objective = OverlapObjective::shadows(&states, f)?;
        let est = hybrid_estimate(self.ansatz.trainable(), &table, &objective)?;
        Ok((est.loss, est.grad, 0))
    }
}

/// Runs `config` from scratch and returns the trained ansatz with every metrics record.
pub fn run_protocol(config: &TrainConfig, target: &StateVector) -> Result<(Ansatz, Vec<Metrics>)> {
    let mut trainer = Trainer::new(config.clone(), target)?;
    let mut records = Vec::new();
    trainer.run(|m| {
        records.push(m.clone());
        Ok(())
    })?;
    Ok((trainer.ansatz.clone(), records))
}

/// Mean exact infidelity over the last `window` iterations of the final stage.
pub fn tail_mean_infidelity(records: &[Metrics], window: usize) -> Option<f64> {
    let last = records.last()?.stage;
    let tail: Vec<f64> = records
        .iter()
        .rev()
        .take_while(|m| m.stage == last && m.iter > 0)
        .filter_map(|m| m.exact_infid)
        .take(window)
        .collect();
    if tail.is_empty() {
        None
    } else {
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    }
}
