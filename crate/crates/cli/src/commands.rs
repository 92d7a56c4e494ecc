//! The four subcommands. Each reads and writes fixed file names inside the output
//! directory.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use nsqst_core::nqs::{read_checkpoint, write_checkpoint};
use nsqst_core::report::{evaluate, write_amplitude_csv, write_metrics_csv, write_observable_csv, Observable};
use nsqst_core::shadows::{collect_shadows, read_shadow_set, write_shadow_set};
use nsqst_core::training::{
    read_trainer_state, tail_mean_infidelity, write_trainer_state, Ansatz, Metrics, Trainer, TrainerState,
};

use crate::config::Experiment;
use crate::target::{read_target, write_target, Metadata, TargetSpec};

pub const TARGET_FILE: &str = "target.nqsv";
pub const TARGET_OBSERVABLES_FILE: &str = "target_observables.csv";
pub const SHADOW_FILE: &str = "shadows.nsqs";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.nqsp";
pub const STATE_FILE: &str = "trainer.nqts";
pub const AMPLITUDE_TABLE: &str = "amplitudes.csv";
pub const OBSERVABLE_TABLE: &str = "observables.csv";
pub const METRICS_TABLE: &str = "metrics.csv";
pub const REPORT_FILE: &str = "report.json";

fn path(exp: &Experiment, name: &str) -> PathBuf {
    exp.output.join(name)
}

/// Writes through a temporary file so an interrupted run never leaves a torn file.
fn write_atomic(target: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let tmp = target.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
        fill(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, target)?;
    Ok(())
}

fn load_target(exp: &Experiment) -> Result<(Metadata, nsqst_core::quantum::StateVector)> {
    let p = path(exp, TARGET_FILE);
    let file = File::open(&p).with_context(|| format!("opening {}; run `prepare` first", p.display()))?;
    let (meta, state) = read_target(BufReader::new(file)).with_context(|| format!("reading {}", p.display()))?;
    if meta.spec != exp.target {
        bail!("{} holds {:?} but the config asks for {:?}", p.display(), meta.spec, exp.target);
    }
    Ok((meta, state))
}

fn observable_kinds(spec: &TargetSpec) -> Vec<Observable> {
    spec.observables().to_vec()
}

pub fn prepare(exp: &Experiment) -> Result<()> {
    fs::create_dir_all(&exp.output)?;
    let state = exp.target.prepare()?;
    let meta = exp.target.metadata();
    write_atomic(&path(exp, TARGET_FILE), |w| write_target(&meta, &state, w))?;
    let rows = nsqst_core::report::observables(&state, &state, &observable_kinds(&exp.target))?;
    write_atomic(&path(exp, TARGET_OBSERVABLES_FILE), |w| Ok(write_observable_csv(&rows, w)?))?;
    println!("target {}", serde_json::to_string(&meta)?);
    let nonzero = state.amps().iter().filter(|a| a.norm_sqr() > 1e-24).count();
    println!("nonzero amplitudes {nonzero} of {}", state.dim());
    for r in &rows {
        println!("{} {:.10}", r.name, r.target);
    }
    Ok(())
}

pub fn collect(exp: &Experiment) -> Result<()> {
    let (_, target) = load_target(exp)?;
    let cfg = &exp.train;
    let set = collect_shadows(&target, cfg.shadows_per_iter, &cfg.noise, cfg.seed, 0)?;
    write_atomic(&path(exp, SHADOW_FILE), |w| Ok(write_shadow_set(&set, w)?))?;
    println!("wrote {} shadows on {} qubits to {}", set.len(), set.n, path(exp, SHADOW_FILE).display());
    Ok(())
}

fn save(exp: &Experiment, trainer: &Trainer) -> Result<()> {
    write_atomic(&path(exp, CHECKPOINT_FILE), |w| Ok(write_checkpoint(&trainer.ansatz().networks(), w)?))?;
    write_atomic(&path(exp, STATE_FILE), |w| Ok(write_trainer_state(&trainer.state(), w)?))
}

fn read_metrics(p: &Path) -> Result<Vec<Metrics>> {
    let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", p.display(), i + 1))?);
    }
    Ok(out)
}

/// Records produced up to and including the saved position.
fn before(records: Vec<Metrics>, state: &TrainerState) -> Vec<Metrics> {
    let stages = state.protocol.stages();
    records
        .into_iter()
        .filter(|m| {
            let idx = stages.iter().position(|s| *s == m.stage).unwrap_or(usize::MAX);
            idx < state.stage_index || (idx == state.stage_index && m.iter <= state.iteration)
        })
        .collect()
}

fn write_record<W: Write>(w: &mut W, m: &Metrics) -> Result<()> {
    serde_json::to_writer(&mut *w, m)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn train(exp: &Experiment, resume: bool) -> Result<()> {
    let (_, target) = load_target(exp)?;
    let cfg = exp.train.clone();
    let metrics_path = path(exp, METRICS_FILE);
    let mut trainer = if resume {
        let nets = read_checkpoint(BufReader::new(File::open(path(exp, CHECKPOINT_FILE)).context("no checkpoint to resume")?))?;
        let state = read_trainer_state(BufReader::new(File::open(path(exp, STATE_FILE)).context("no trainer state to resume")?))?;
        let kept = before(read_metrics(&metrics_path)?, &state);
        write_atomic(&metrics_path, |w| kept.iter().try_for_each(|m| write_record(w, m)))?;
        log::info!("resuming {:?} at stage {} iteration {}", state.protocol, state.stage_index, state.iteration);
        Trainer::resume(cfg.clone(), &target, Ansatz::from_networks(nets)?, state)?
    } else {
        Trainer::new(cfg.clone(), &target)?
    };
    if cfg.reuse_shadows && path(exp, SHADOW_FILE).exists() {
        let set = read_shadow_set(BufReader::new(File::open(path(exp, SHADOW_FILE))?))?;
        if set.n != target.n() {
            bail!("shadow file has {} qubits, target has {}", set.n, target.n());
        }
        log::info!("training on {} recorded shadows", set.len());
        trainer.set_shadows(set.states())?;
    }

    let file = if resume {
        fs::OpenOptions::new().append(true).open(&metrics_path)?
    } else {
        File::create(&metrics_path)?
    };
    let mut sink = BufWriter::new(file);
    if !resume {
        write_record(&mut sink, &trainer.snapshot()?)?;
    }
    let mut last = None;
    while !trainer.is_finished() {
        for m in trainer.step()? {
            if m.iter % 100 == 0 {
                log::info!("{:?} {}: loss {:?} infidelity {:?}", m.stage, m.iter, m.loss_est, m.exact_infid);
            }
            log::debug!("{:?} {}: loss {:?} infidelity {:?}", m.stage, m.iter, m.loss_est, m.exact_infid);
            write_record(&mut sink, &m)?;
            last = Some(m);
        }
        if trainer.state().iteration % exp.checkpoint_every == 0 {
            sink.flush()?;
            save(exp, &trainer)?;
        }
    }
    sink.flush()?;
    save(exp, &trainer)?;
    if let Some(m) = last {
        println!(
            "finished {:?} at iteration {}: loss {:?} infidelity {:?}",
            m.stage, m.iter, m.loss_est, m.exact_infid
        );
    } else {
        println!("nothing to do");
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    infidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_mean_infidelity: Option<f64>,
    observables: Vec<(String, f64, f64)>,
}

pub fn evaluate_run(exp: &Experiment) -> Result<()> {
    let (meta, target) = load_target(exp)?;
    let p = path(exp, CHECKPOINT_FILE);
    let nets = read_checkpoint(BufReader::new(File::open(&p).with_context(|| format!("opening {}", p.display()))?))?;
    let ansatz = Ansatz::from_networks(nets)?;
    if ansatz.n() != target.n() {
        bail!("checkpoint has {} qubits but the target has {}", ansatz.n(), target.n());
    }
    let model = ansatz.to_state_vector()?;
    let report = evaluate(&model, &target, &observable_kinds(&meta.spec))?;
    write_atomic(&path(exp, AMPLITUDE_TABLE), |w| Ok(write_amplitude_csv(&report.rows, w)?))?;
    write_atomic(&path(exp, OBSERVABLE_TABLE), |w| Ok(write_observable_csv(&report.observables, w)?))?;

    let relative_phase = match meta.spec {
        TargetSpec::Ghz { .. } => {
            let ones = (1u64 << target.n()) - 1;
            let d = model.amplitude(ones).arg() - model.amplitude(0).arg();
            Some(d.rem_euclid(std::f64::consts::TAU))
        }
        _ => None,
    };
    let metrics_path = path(exp, METRICS_FILE);
    let tail = if metrics_path.exists() {
        let records = read_metrics(&metrics_path)?;
        write_atomic(&path(exp, METRICS_TABLE), |w| Ok(write_metrics_csv(&records, w)?))?;
        tail_mean_infidelity(&records, 100)
    } else {
        None
    };
    let summary = Summary {
        infidelity: report.infidelity,
        relative_phase,
        tail_mean_infidelity: tail,
        observables: report.observables.iter().map(|r| (r.name.clone(), r.target, r.model)).collect(),
    };
    write_atomic(&path(exp, REPORT_FILE), |w| {
        serde_json::to_writer_pretty(&mut *w, &summary)?;
        Ok(w.write_all(b"\n")?)
    })?;
    println!("infidelity {:.6}", report.infidelity);
    if let Some(phase) = relative_phase {
        println!("relative phase {phase:.6}");
    }
    if let Some(t) = tail {
        println!("last-100 mean infidelity {t:.6}");
    }
    for r in &report.observables {
        println!("{} target {:.6} model {:.6}", r.name, r.target, r.model);
    }
    Ok(())
}
