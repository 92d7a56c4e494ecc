//! `nsqst`: prepare targets, collect shadows, train and evaluate reconstructions.

mod commands;
mod config;
mod target;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use config::Overrides;

#[derive(Parser, Debug)]
#[command(name = "nsqst", version, about = "Neural quantum state tomography from classical shadows")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the target state and write it with its metadata.
    Prepare,
    /// Measure classical shadows of the prepared target.
    Collect,
    /// Train a network state; writes metrics, a checkpoint and the optimizer state.
    Train {
        /// Continue from the saved checkpoint and optimizer state.
        #[arg(long)]
        resume: bool,
    },
    /// Compare the trained state with the target and export CSV tables.
    Evaluate,
}

fn init_logging() -> Result<()> {
    let level = std::env::var("NSQST_LOG").unwrap_or_else(|_| "info".into());
    let filter = match level.as_str() {
        "error" => log::LevelFilter::Error,
        "info" => log::LevelFilter::Info,
        "debug" => log::LevelFilter::Debug,
        other => bail!("NSQST_LOG must be error, info or debug, not {other:?}"),
    };
    env_logger::Builder::new().filter_level(filter).format_timestamp_millis().init();
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_logging()?;
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let Some(path) = cli.config else {
        bail!("--config is required");
    };
    let overrides = Overrides {
        seed: cli.seed,
        output: cli.output,
    };
    let exp = config::load(&path, &overrides)?;
    match cli.command {
        Command::Prepare => commands::prepare(&exp),
        Command::Collect => commands::collect(&exp),
        Command::Train { resume } => commands::train(&exp, resume),
        Command::Evaluate => commands::evaluate_run(&exp),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
