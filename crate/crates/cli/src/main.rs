//! `vqs`: staged pipeline for variational quantum sensing experiments.
//!
//! Stages run in order: optimize → sample → train → benchmark, with
//! compare-ghz as a self-contained sweep and summary/template as utilities.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vqs_cli::config::{self, RunConfig};
use vqs_cli::stages::{run_stage, StageContext};
use vqs_cli::{report, CliError};

#[derive(Parser)]
#[command(
    name = "vqs",
    about = "Variational quantum sensing pipeline",
    version,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct StageArgs {
    /// Path to the run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Seed override for this stage only.
    #[arg(long)]
    stage_seed: Option<u64>,
    /// Proceed despite config-hash mismatches between artifacts.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print a documented default configuration.
    Template {
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize the sensor parameters (θ, μ).
    Optimize(StageArgs),
    /// Sample training and testing datasets from the optimized device.
    Sample(StageArgs),
    /// Train the neural estimator on the sampled data.
    Train(StageArgs),
    /// Evaluate estimator bias and variance against sequence length.
    Benchmark(StageArgs),
    /// Sweep dephasing strength and compare against the GHZ parity baseline.
    CompareGhz(StageArgs),
    /// Summarize a completed run directory.
    Summary {
        /// Run directory holding the artifacts.
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_threads() {
    if let Ok(v) = std::env::var("VQS_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
        }
    }
}

fn stage_context(args: &StageArgs) -> Result<StageContext, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.run.out_dir = out.display().to_string();
    }
    Ok(StageContext::new(cfg, args.stage_seed, args.force))
}

fn run() -> Result<(), CliError> {
    init_threads();
    let cli = Cli::parse();
    match cli.command {
        Command::Template { out } => {
            let text = config::template();
            match out {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Optimize(args) => run_stage(&stage_context(&args)?, "optimize"),
        Command::Sample(args) => run_stage(&stage_context(&args)?, "sample"),
        Command::Train(args) => run_stage(&stage_context(&args)?, "train"),
        Command::Benchmark(args) => run_stage(&stage_context(&args)?, "benchmark"),
        Command::CompareGhz(args) => run_stage(&stage_context(&args)?, "compare-ghz"),
        Command::Summary { out } => {
            let text = report::summary(&out)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
