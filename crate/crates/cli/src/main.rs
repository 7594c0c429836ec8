//! `qest`: command-line driver for the estimation-bound library.
//!
//! Every subcommand writes its main artifact to `--out` (stdout otherwise)
//! and, when `--out` is given, a `<out>.manifest.json` with the resolved
//! parameters and a SHA-256 of each file written.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 numeric error or failed
//! self-check, 4 internal error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

mod commands;
mod output;

use output::Sink;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qest::Error),
    #[error("{0}")]
    Io(String),
    #[error("self-check failed: {0}")]
    Check(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) | CliError::Check(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qest", version, about = "Multiparameter quantum estimation bounds and trade-off data")]
struct Cli {
    /// Output file; stdout when absent. Also writes <out>.manifest.json
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for random cost samples and simulations [default: 0, or the seed in --config]
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 0 uses every core
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// SLD/RLD quantum Fisher information of a model document (JSON)
    Qfi(QfiArgs),
    /// Two-parameter trade-off curves (CSV: curve,t,nv1,nv2)
    Curve(CurveArgs),
    /// Three-parameter qubit trade-off surface (CSV: s,t,nv1,nv2,nv3)
    Surface(SurfaceArgs),
    /// State-independent qubit sweep (CSV) plus a summary of the floor checks
    StateIndep(StateIndepArgs),
    /// Optimal, rotated-Pauli and SLD-mixture variance clouds (CSV)
    CompareMeasurements(CompareArgs),
    /// Monte-Carlo attainability check (JSON report)
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct QfiArgs {
    /// Model document, e.g. {"type":"qubit","z0":0.7,"euler_deg":[25,25,55]}
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveBound {
    Sld,
    Gm,
    Rld,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    /// Bound whose trade-off curve is drawn
    #[arg(long, value_enum, default_value_t = CurveBound::Gm)]
    pub bound: CurveBound,
    /// First diagonal entry of the inverse QFI
    #[arg(long, default_value_t = 0.25)]
    pub u1: f64,
    /// Second diagonal entry of the inverse QFI
    #[arg(long, default_value_t = 0.75)]
    pub u2: f64,
    /// Off-diagonal entry of the inverse QFI
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    /// Hilbert-space dimensions for the Gill–Massar curves (comma separated)
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
    pub d: Vec<usize>,
    /// Off-diagonal entry a of H⁻¹DH⁻¹ = [[0, a], [−a, 0]] for the RLD curve
    #[arg(long, default_value_t = 0.3)]
    pub skew: f64,
    /// Points per curve
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Also emit the upper envelope of the bound's lines for every Gill–Massar curve
    #[arg(long)]
    pub envelope: bool,
    /// Also emit the family of lines t·NV1 + (1−t)·NV2 = B(t) as two-point segments
    #[arg(long)]
    pub emit_lines: bool,
    /// Number of lines when --emit-lines is set
    #[arg(long, default_value_t = 20)]
    pub lines: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceBound {
    Gm,
    Rld,
}

#[derive(Debug, Args, Serialize)]
pub struct SurfaceArgs {
    /// Bound whose surface is drawn
    #[arg(long, value_enum, default_value_t = SurfaceBound::Gm)]
    pub bound: SurfaceBound,
    /// Bloch-vector length of the reference state
    #[arg(long, default_value_t = 0.7)]
    pub z0: f64,
    /// Cost-simplex resolution: spacing 1/grid
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Euler angles (degrees) of the parameter frame
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "0,0,0", allow_negative_numbers = true)]
    pub euler: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct StateIndepArgs {
    /// Bloch-vector lengths (comma separated)
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99,0.999,0.9999,0.999999")]
    pub z0: Vec<f64>,
    /// Euler-angle step in degrees on all three axes
    #[arg(long, default_value_t = 3.0)]
    pub euler_step: f64,
    /// Random diagonal costs per rotation
    #[arg(long, default_value_t = 50)]
    pub costs: usize,
    /// Write every n-th grid point to the CSV (0 writes none; the summary always covers the full grid)
    #[arg(long, default_value_t = 1000)]
    pub emit_every: u64,
    /// Re-evaluate every n-th point through the general Gill–Massar evaluator (0 disables)
    #[arg(long, default_value_t = 997)]
    pub check_every: u64,
    /// Initial grid size of the two-parameter minimization
    #[arg(long, default_value_t = 401)]
    pub two_param_resolution: usize,
    /// Refinement rounds of the two-parameter minimization
    #[arg(long, default_value_t = 5)]
    pub refine: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Bloch-vector length of the reference state
    #[arg(long, default_value_t = 0.92)]
    pub z0: f64,
    /// Euler angles (degrees) of the parameter frame
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "25,25,55", allow_negative_numbers = true)]
    pub euler: Vec<f64>,
    /// Random costs for the optimal cloud
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Random mixture weights for the Pauli and SLD clouds
    #[arg(long, default_value_t = 2000)]
    pub mixtures: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Simulation document; defaults to z0 = 0.7, the optimal mixture for G = 𝟙/3, N = 1e5, 500 trials
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let start = Instant::now();
    let mut sink = Sink::new(cli.out.clone());
    let (name, params) = match &cli.command {
        Command::Qfi(a) => ("qfi", commands::qfi(a, &mut sink)?),
        Command::Curve(a) => ("curve", commands::curve(a, &mut sink)?),
        Command::Surface(a) => ("surface", commands::surface(a, &mut sink)?),
        Command::StateIndep(a) => ("state-indep", commands::state_indep(a, cli.seed, &mut sink)?),
        Command::CompareMeasurements(a) => ("compare-measurements", commands::compare(a, cli.seed, &mut sink)?),
        Command::Simulate(a) => ("simulate", commands::simulate(a, cli.seed, &mut sink)?),
    };
    let check = params.check.clone();
    sink.finish(name, params.value, start.elapsed())?;
    match check {
        Some(msg) => Err(CliError::Check(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    std::panic::set_hook(Box::new(|info| {
        eprintln!("qest: internal error: {info}");
    }));
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("qest: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(4),
    }
}
