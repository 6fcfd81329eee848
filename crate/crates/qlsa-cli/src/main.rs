//! `qlsa`: cost estimates, sweeps, sampling diagnostics, dense simulation
//! and figure data for the randomized adiabatic linear solver.

mod commands;
mod figures;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlsa_core::sampling::TimeDistributionKind;

use crate::commands::CliError;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser, Debug)]
#[command(name = "qlsa", version, about = "Resource estimates and desk-scale simulation for the randomized adiabatic QLSA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Query-count bound and its breakdown for one parameter point.
    Estimate(EstimateArgs),
    /// Cost breakdown over a range of κ.
    Sweep(SweepArgs),
    /// Draw evolution times and compare their moments with the published values.
    SampleDist(SampleDistArgs),
    /// Run the full protocol on a small system from a JSON problem file.
    Simulate(SimulateArgs),
    /// Compare against the reference algorithm's cost.
    Compare(CompareArgs),
    /// Regenerate figure data as CSV or SVG.
    Figures(FiguresArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    #[arg(long, default_value_t = 1000.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = qlsa_core::schedule::DEFAULT_GAMMA)]
    pub gamma: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    MeanOpt,
    VarOpt,
}

impl From<Dist> for TimeDistributionKind {
    fn from(d: Dist) -> Self {
        match d {
            Dist::MeanOpt => TimeDistributionKind::MeanOptimized,
            Dist::VarOpt => TimeDistributionKind::VarianceOptimized,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ideal,
    Emulated,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Ancilla qubits of the block-encoding of A.
    #[arg(long, default_value_t = 1)]
    pub a_qubits: u64,
    /// Dimension N of the system.
    #[arg(long, default_value_t = 2)]
    pub dimension: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = qlsa_core::schedule::DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e2)]
    pub kappa_min: f64,
    #[arg(long, default_value_t = 1e6)]
    pub kappa_max: f64,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    /// Space the κ grid linearly instead of logarithmically.
    #[arg(long)]
    pub linear: bool,
    #[arg(long, default_value_t = 1)]
    pub a_qubits: u64,
    #[arg(long, default_value_t = 2)]
    pub dimension: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SampleDistArgs {
    #[arg(long, value_enum, default_value_t = Dist::MeanOpt)]
    pub dist: Dist,
    /// Gap Δ in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Histogram bins of |t|Δ on [0, 20] for CSV output.
    #[arg(long, default_value_t = 80)]
    pub bins: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// JSON problem file with matrix, b, norm_bound and kappa_bound.
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = qlsa_core::schedule::DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Ideal)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Dist::MeanOpt)]
    pub dist: Dist,
    /// Override the analytic step count.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Check the κ bound against the true condition number.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    /// κ values; defaults to the decades 10² to 10⁶.
    #[arg(long, value_delimiter = ',')]
    pub kappa: Vec<f64>,
    /// Also locate the κ where both costs coincide.
    #[arg(long)]
    pub crossover: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    All,
}

#[derive(Args, Debug)]
pub struct FiguresArgs {
    #[arg(value_enum)]
    pub which: Option<Figure>,
    /// Truncation-order surface; same as `fig2`.
    #[arg(long)]
    pub jacobi_anger: bool,
    /// Write `figN.csv` and `figN.svg` into this directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("QLSA_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("QLSA_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Estimate(a) => commands::estimate(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::SampleDist(a) => commands::sample_dist(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Figures(a) => commands::figures(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
