//! `beamsim` — config-driven, reproducible beam-management experiments.
//!
//! Four subcommands cover the full pipeline: `gen` simulates datasets,
//! `train` fits a predictor, `eval` reports KPIs against the exhaustive and
//! hierarchical baselines, and `complexity` renders the model cost table.
//! Runs are described by a plain-text config file (see `assets/default.cfg`);
//! flags override individual keys. One master seed determines every output
//! byte. `BEAMSIM_THREADS` caps the worker-thread count.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use crate::config::RunConfig;

/// Shipped defaults; used verbatim when no `--config` is given.
const DEFAULT_CFG: &str = include_str!("../assets/default.cfg");

#[derive(Parser)]
#[command(
    name = "beamsim",
    about = "Deterministic mmWave beam-management simulator and beam predictor",
    version
)]
struct Cli {
    /// Run configuration file (key = value); defaults to the shipped config.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for result files and manifests.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Master seed override; all randomness derives from this one value.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate datasets: one CSV per scenario plus codebook exports.
    Gen {
        /// Scenario list override, e.g. `s1` or `s1,s2,s3`.
        #[arg(long, value_name = "LIST")]
        scenario: Option<String>,
        /// Samples per dataset.
        #[arg(long, value_name = "INT")]
        n: Option<usize>,
    },
    /// Train the configured predictor on a generated dataset.
    Train {
        /// Dataset CSV produced by `gen`.
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        /// Training epoch count override.
        #[arg(long, value_name = "INT")]
        epochs: Option<usize>,
    },
    /// Report KPIs: single model+dataset, or a multi-scenario suite.
    Eval {
        /// Trained model JSON (single-scenario mode).
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        /// Dataset CSV (single-scenario mode).
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        /// Scenario list override; more than one switches to suite mode.
        #[arg(long, value_name = "LIST")]
        scenario: Option<String>,
        /// Samples per regenerated suite dataset.
        #[arg(long, value_name = "INT")]
        n: Option<usize>,
        /// Suite-mode training epoch count override.
        #[arg(long, value_name = "INT")]
        epochs: Option<usize>,
        /// Candidate-list sizes, e.g. `1,2,4`.
        #[arg(long, value_name = "LIST")]
        topk: Option<String>,
        /// Probe the top-K candidates and keep the strongest.
        #[arg(long, value_name = "BOOL")]
        probe_confirm: Option<bool>,
    },
    /// Render the complexity table (reference comparison or a spec file).
    Complexity {
        /// Layer-spec JSON; omit for the built-in reference table.
        #[arg(long, value_name = "PATH")]
        spec: Option<PathBuf>,
    },
}

/// Applies `BEAMSIM_THREADS` before any parallel work starts.
fn init_thread_pool() -> Result<()> {
    let Ok(raw) = std::env::var("BEAMSIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .with_context(|| format!("BEAMSIM_THREADS must be a positive integer, got {raw:?}"))?;
    if threads == 0 {
        bail!("BEAMSIM_THREADS must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("installing the worker thread pool")?;
    Ok(())
}

fn parse_scenarios(list: &str) -> Result<Vec<beamsim_core::ScenarioId>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| anyhow::anyhow!("--scenario: {e}"))
        })
        .collect()
}

fn parse_topk(list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| anyhow::anyhow!("--topk: bad list item {s:?}: {e}"))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    init_thread_pool()?;
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::parse(DEFAULT_CFG).expect("shipped defaults are valid"),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }

    match &cli.command {
        Command::Gen { scenario, n } => {
            if let Some(list) = scenario {
                config.scenarios = parse_scenarios(list)?;
            }
            if let Some(n) = n {
                config.n_samples = *n;
            }
            config.validate()?;
            commands::cmd_gen(&config, &cli.out)
        }
        Command::Train { data, epochs } => {
            if let Some(epochs) = epochs {
                config.epochs = *epochs;
            }
            config.validate()?;
            commands::cmd_train(&config, data, &cli.out)
        }
        Command::Eval {
            model,
            data,
            scenario,
            n,
            epochs,
            topk,
            probe_confirm,
        } => {
            if let Some(list) = scenario {
                config.scenarios = parse_scenarios(list)?;
            }
            if let Some(n) = n {
                config.n_samples = *n;
            }
            if let Some(epochs) = epochs {
                config.epochs = *epochs;
            }
            if let Some(list) = topk {
                config.topk = parse_topk(list)?;
            }
            if let Some(probe) = probe_confirm {
                config.probe_confirm = *probe;
            }
            config.validate()?;
            commands::cmd_eval(&config, model.as_deref(), data.as_deref(), &cli.out)
        }
        Command::Complexity { spec } => {
            commands::cmd_complexity(&config, spec.as_deref(), &cli.out)
        }
    }
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
