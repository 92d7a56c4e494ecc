//! Experiment configuration: a flat TOML table. Every key except `target` is optional and
//! falls back to the training defaults; unknown keys are rejected.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use nsqst_core::shadows::NoiseModel;
use nsqst_core::training::{FStrategy, Protocol, TrainConfig};

use crate::target::TargetSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Qcd,
    Afh,
    Ghz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    AmplitudeDamping,
    CnotDepolarizing,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub target: TargetKind,
    pub ghz_qubits: Option<usize>,
    pub ghz_phase: Option<f64>,
    pub protocol: Option<Protocol>,
    pub iterations: Option<usize>,
    pub shadows_per_iter: Option<usize>,
    pub mc_samples: Option<usize>,
    pub samples_per_basis: Option<usize>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub nnqst_lr: Option<f64>,
    pub nsqst_lr: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub eps: Option<f64>,
    pub noise: Option<NoiseKind>,
    pub noise_strength: Option<f64>,
    pub f_strategy: Option<FStrategy>,
    pub init_scale: Option<f64>,
    pub layers: Option<usize>,
    pub heads: Option<usize>,
    pub dim: Option<usize>,
    pub exact_overlaps: Option<bool>,
    pub reuse_shadows: Option<bool>,
    pub track_infidelity: Option<bool>,
    pub checkpoint_every: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

/// A fully resolved experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub target: TargetSpec,
    pub train: TrainConfig,
    pub checkpoint_every: u64,
    pub output: PathBuf,
}

/// Values given on the command line, which take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Experiment> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let file: ConfigFile = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    resolve(file, overrides)
}

pub fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<Experiment> {
    let target = match file.target {
        TargetKind::Qcd => TargetSpec::Qcd,
        TargetKind::Afh => TargetSpec::Afh,
        TargetKind::Ghz => TargetSpec::Ghz {
            n: file.ghz_qubits.unwrap_or(6),
            phase: file.ghz_phase.unwrap_or(FRAC_PI_2),
        },
    };
    if file.target != TargetKind::Ghz && (file.ghz_qubits.is_some() || file.ghz_phase.is_some()) {
        bail!("ghz_qubits and ghz_phase only apply to the ghz target");
    }
    let Some(seed) = overrides.seed.or(file.seed) else {
        bail!("a seed is required: set `seed` in the config or pass --seed");
    };
    let Some(output) = overrides.output.clone().or(file.output) else {
        bail!("an output directory is required: set `output` in the config or pass --output");
    };
    let noise = match (file.noise.unwrap_or(NoiseKind::None), file.noise_strength) {
        (NoiseKind::None, None) => NoiseModel::None,
        (NoiseKind::None, Some(_)) => bail!("noise_strength given without a noise model"),
        (_, None) => bail!("noise_strength is required with a noise model"),
        (NoiseKind::AmplitudeDamping, Some(p)) => NoiseModel::AmplitudeDamping(p),
        (NoiseKind::CnotDepolarizing, Some(f)) => NoiseModel::CnotDepolarizing(f),
    };
    let d = TrainConfig::default();
    let train = TrainConfig {
        protocol: file.protocol.unwrap_or(d.protocol),
        iterations: file.iterations.unwrap_or(d.iterations),
        shadows_per_iter: file.shadows_per_iter.unwrap_or(d.shadows_per_iter),
        mc_samples: file.mc_samples.unwrap_or(d.mc_samples),
        samples_per_basis: file.samples_per_basis.unwrap_or(d.samples_per_basis),
        batch_size: file.batch_size.unwrap_or(d.batch_size),
        epochs: file.epochs.unwrap_or(d.epochs),
        nnqst_lr: file.nnqst_lr.unwrap_or(d.nnqst_lr),
        nsqst_lr: file.nsqst_lr.unwrap_or(d.nsqst_lr),
        beta1: file.beta1.unwrap_or(d.beta1),
        beta2: file.beta2.unwrap_or(d.beta2),
        eps: file.eps.unwrap_or(d.eps),
        seed,
        noise,
        f_strategy: file.f_strategy.unwrap_or(d.f_strategy),
        init_scale: file.init_scale.unwrap_or(d.init_scale),
        layers: file.layers.unwrap_or(d.layers),
        heads: file.heads.unwrap_or(d.heads),
        dim: file.dim.unwrap_or(d.dim),
        exact_overlaps: file.exact_overlaps.unwrap_or(d.exact_overlaps),
        reuse_shadows: file.reuse_shadows.unwrap_or(d.reuse_shadows),
        track_infidelity: file.track_infidelity.unwrap_or(d.track_infidelity),
    };
    train.validate()?;
    train.noise.validate(target.qubits())?;
    train.architecture(target.qubits())?;
    let checkpoint_every = file.checkpoint_every.unwrap_or(100);
    if checkpoint_every == 0 {
        bail!("checkpoint_every must be at least 1");
    }
    Ok(Experiment {
        target,
        train,
        checkpoint_every,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Experiment> {
        resolve(toml::from_str(text)?, &Overrides::default())
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let e = parse("target = \"ghz\"\nseed = 3\noutput = \"out\"").unwrap();
        assert_eq!(e.target, TargetSpec::Ghz { n: 6, phase: FRAC_PI_2 });
        assert_eq!(e.train, TrainConfig { seed: 3, ..TrainConfig::default() });
    }

    #[test]
    fn unknown_and_inconsistent_keys_fail() {
        assert!(parse("target = \"qcd\"\nseed = 1\noutput = \"o\"\nlearning_rate = 0.1").is_err());
        assert!(parse("target = \"qcd\"\nseed = 1\noutput = \"o\"\nghz_phase = 0.1").is_err());
        assert!(parse("target = \"qcd\"\noutput = \"o\"").is_err());
        assert!(parse("target = \"qcd\"\nseed = 1").is_err());
        assert!(parse("target = \"qcd\"\nseed = 1\noutput = \"o\"\nnoise = \"amplitude_damping\"").is_err());
        assert!(parse("target = \"qcd\"\nseed = 1\noutput = \"o\"\nbatch_size = 0").is_err());
    }

    #[test]
    fn overrides_win() {
        let file: ConfigFile = toml::from_str("target = \"afh\"\nseed = 1\noutput = \"a\"\nprotocol = \"hybrid\"").unwrap();
        let o = Overrides {
            seed: Some(9),
            output: Some("b".into()),
        };
        let e = resolve(file, &o).unwrap();
        assert_eq!(e.train.seed, 9);
        assert_eq!(e.output, PathBuf::from("b"));
        assert_eq!(e.train.protocol, Protocol::Hybrid);
    }

    #[test]
    fn noise_keys() {
        let e = parse("target = \"ghz\"\nseed = 1\noutput = \"o\"\nnoise = \"amplitude_damping\"\nnoise_strength = 0.9")
            .unwrap();
        assert_eq!(e.train.noise, NoiseModel::AmplitudeDamping(0.9));
        assert!(parse("target = \"ghz\"\nseed = 1\noutput = \"o\"\nnoise_strength = 0.9").is_err());
    }
}
