//! Batch front end: configuration ingestion, the three canonical
//! experiments (interference scan, Bell scan, timing histogram), analyzer
//! calibration, and click-stream replay. Deterministic seeding throughout:
//! identical config + seed gives byte-identical output files.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or invocation; exit code 2.
    Config(String),
    /// A failure during the run; exit code 3.
    Runtime(String),
}

impl CliError {
    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<spdc_core::Error> for CliError {
    fn from(e: spdc_core::Error) -> Self {
        match e {
            spdc_core::Error::Config(msg) => CliError::Config(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "spdc",
    about = "Simulator and analysis pipeline for a collinear downconversion \
             polarization-entanglement bench",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON run configuration; defaults apply for every omitted field.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if absent).
    #[arg(long, default_value = "spdc-output")]
    out: PathBuf,
    /// Worker threads for scan points.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Exported click stream (detector,time_ps) to re-analyze.
    #[arg(long)]
    input: PathBuf,
    /// Start detector of the replay histogram.
    #[arg(long, default_value = "TT")]
    start: String,
    /// Stop detector of the replay histogram.
    #[arg(long, default_value = "TR")]
    stop: String,
}

#[derive(Subcommand)]
enum Command {
    /// Single-beam quantum-interference scan over θ_T, with an optional
    /// aperture sweep.
    InterferenceScan(RunArgs),
    /// Two-arm Bell scan: θ_R scans at each θ_T, fits, and the CHSH S report.
    BellScan(RunArgs),
    /// Pre- and post-compensation start-stop timing histograms.
    Histogram(RunArgs),
    /// Grid-search the analyzer conventions that maximize S for the ideal
    /// pair state.
    CalibrateConventions(RunArgs),
    /// Re-analyze an exported click stream.
    Replay(ReplayArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::InterferenceScan(args) => commands::interference::run(&args),
        Command::BellScan(args) => commands::bell::run(&args),
        Command::Histogram(args) => commands::histogram::run(&args),
        Command::CalibrateConventions(args) => commands::calibrate::run(&args),
        Command::Replay(args) => commands::replay::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
