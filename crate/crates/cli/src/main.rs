use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use layered_hill::{
    estimate, geometric_constants, Constraint64, ConstraintKind, Error as CoreError, EstimateOptions,
    PointCloud64,
};
use layered_hill_harness::{
    coverage_experiment, export_normalized_samples, run_experiment, write_coverage_csv, write_report_csv,
    ExperimentConfig, HarnessError,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INSUFFICIENT: u8 = 3;

#[derive(Parser)]
#[command(name = "layered-hill", version, about = "Layered Hill tail-exponent estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the tail exponent of a point cloud; prints JSON.
    Estimate(EstimateArgs),
    /// Point-estimate table (report.csv).
    Simulate(RunArgs),
    /// Interval coverage table (coverage.csv).
    Coverage(RunArgs),
    /// Normalized statistics per replicate (samples.csv).
    Normality(RunArgs),
    /// Geometric constants C_k and D_{k,l}; prints JSON.
    Constants(ConstantsArgs),
}

#[derive(Args)]
struct ConstraintArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    k: usize,
    /// always_one, pair_distance, diameter or connectivity
    #[arg(long, default_value = "always_one")]
    constraint: String,
    #[arg(long, default_value_t = 0.0)]
    radius: f64,
    /// Monte Carlo samples for the constants; forces Monte Carlo for k >= 2.
    #[arg(long)]
    mc_samples: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV of points, one per row; an optional header row is skipped.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    constraint: ConstraintArgs,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    gamma: Option<f64>,
    /// Defaults to log m / log n.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    constraint: ConstraintArgs,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the path named in the config's outputs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    workers: Option<usize>,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_CONFIG,
            error: error.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::InsufficientExtremes { .. } | CoreError::ArityExceedsCloud { .. } => EXIT_INSUFFICIENT,
            CoreError::InvalidConstraint(_)
            | CoreError::ParameterOutOfRange(_)
            | CoreError::ProbabilityOutOfRange(_)
            | CoreError::UnsupportedConstraint(_)
            | CoreError::NonPositiveCellSize(_) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        };
        Self { code, error: e.into() }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let code = if e.is_config() { EXIT_CONFIG } else { EXIT_FAILURE };
        Self { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_FAILURE,
            error,
        }
    }
}

type Outcome = Result<(), Failure>;

fn constraint(args: &ConstraintArgs) -> Result<Constraint64, Failure> {
    let kind = ConstraintKind::parse(&args.constraint)
        .ok_or_else(|| Failure::config(anyhow!("unknown constraint kind {:?}", args.constraint)))?;
    Ok(Constraint64::new(kind, args.k, args.radius)?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Outcome {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).context("writing JSON")?;
    writeln!(out).context("writing JSON")?;
    Ok(())
}

fn run_estimate(args: &EstimateArgs) -> Outcome {
    let c = constraint(&args.constraint)?;
    let file = File::open(&args.input)
        .with_context(|| format!("cannot open {}", args.input.display()))
        .map_err(Failure::config)?;
    let cloud = PointCloud64::read_csv(BufReader::new(file), args.constraint.dim)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let gc = geometric_constants(&c, args.constraint.dim, args.constraint.mc_samples)?;
    let opts = EstimateOptions {
        gamma: args.gamma,
        beta: args.beta,
        xi: args.xi,
        ..EstimateOptions::default()
    };
    let report = estimate(&cloud, &c, args.m, &gc, &opts)?;
    print_json(&report)
}

fn run_constants(args: &ConstantsArgs) -> Outcome {
    let c = constraint(&args.constraint)?;
    print_json(&geometric_constants(&c, args.constraint.dim, args.constraint.mc_samples)?)
}

fn output_path(args: &RunArgs, configured: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    args.out
        .clone()
        .or_else(|| configured.clone())
        .ok_or_else(|| Failure::config(anyhow!("no output path: pass --out or set it in the config")))
}

fn create(path: &Path) -> Result<File, Failure> {
    Ok(File::create(path).with_context(|| format!("cannot create {}", path.display()))?)
}

fn run_simulate(args: &RunArgs) -> Outcome {
    let cfg = ExperimentConfig::load(&args.config)?;
    let path = output_path(args, &cfg.outputs.report)?;
    let report = run_experiment(&cfg, args.workers)?;
    write_report_csv(&report, create(&path)?)?;
    Ok(())
}

fn run_coverage(args: &RunArgs) -> Outcome {
    let cfg = ExperimentConfig::load(&args.config)?;
    let path = output_path(args, &cfg.outputs.coverage)?;
    let rows = coverage_experiment(&cfg, args.workers)?;
    write_coverage_csv(&rows, create(&path)?)?;
    Ok(())
}

fn run_normality(args: &RunArgs) -> Outcome {
    let cfg = ExperimentConfig::load(&args.config)?;
    let path = output_path(args, &cfg.outputs.samples)?;
    export_normalized_samples(&cfg, &path, args.workers)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Estimate(a) => run_estimate(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Coverage(a) => run_coverage(a),
        Command::Normality(a) => run_normality(a),
        Command::Constants(a) => run_constants(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
