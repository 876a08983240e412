//! `tori`: experiment driver for cubic NLS dynamics on rational and
//! irrational 2D tori.
//!
//! Every subcommand takes `--config <file.json>`, any number of
//! `--set key=value` overrides (dotted keys reach nested sections) and
//! `--out <dir>`. The worker pool size comes from `TORI_WORKERS`.
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure, 4 work budget exceeded; failures also print a JSON error object
//! on stderr and into `<out>/error.json`.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::output::Output;

const WORKERS_ENV: &str = "TORI_WORKERS";

#[derive(Parser)]
#[command(name = "tori", version, about = "Cubic NLS experiments on rational and irrational 2D tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded ensemble and write diagnostic series, spectra and checkpoints.
    Simulate(Common),
    /// Threshold M per (R, ε) on a rational and an irrational torus.
    ThresholdStudy(Common),
    /// Kinematic level sets of quasi-resonant excitation.
    Kinematic(Common),
    /// Check that a floating-point aspect ratio cannot fake resonances.
    PrecisionAudit(Common),
    /// Integrate the quasi-resonant truncated system and track its invariants.
    Truncated(Common),
    /// Observed order of accuracy on a halving time-step ladder.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration; unspecified keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set t_end=0.5 --set torus.omega_sq=1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

fn execute(kind: Experiment, args: &Common) -> Result<(), CliError> {
    init_workers()?;
    let config = ExperimentConfig::load(kind, args.config.as_deref(), &args.set, args.out.as_deref())?;
    let out = Output::create(&config)?;
    let summary = match kind {
        Experiment::Simulate => commands::simulate::run(&config, &out)?,
        Experiment::ThresholdStudy => commands::threshold::run(&config, &out)?,
        Experiment::Kinematic => commands::kinematic::run(&config, &out)?,
        Experiment::PrecisionAudit => commands::audit::run(&config, &out)?,
        Experiment::Truncated => commands::truncated::run(&config, &out)?,
        Experiment::Convergence => commands::convergence::run(&config, &out)?,
    };
    out.manifest(&config, summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Simulate(a) => (Experiment::Simulate, a),
        Command::ThresholdStudy(a) => (Experiment::ThresholdStudy, a),
        Command::Kinematic(a) => (Experiment::Kinematic, a),
        Command::PrecisionAudit(a) => (Experiment::PrecisionAudit, a),
        Command::Truncated(a) => (Experiment::Truncated, a),
        Command::Convergence(a) => (Experiment::Convergence, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            output::write_error(args.out.as_deref(), &e);
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
