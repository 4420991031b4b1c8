//! `mirror-bench`: generate mirror circuits, simulate them, fit decays and
//! emit tables and figures.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on runtime errors.

mod commands;
mod noise;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub const OUT_ENV: &str = "MIRROR_BENCH_OUT";

#[derive(Parser, Debug)]
#[command(name = "mirror-bench", version, about = "Mirror benchmarking circuits, simulation and analysis")]
struct Cli {
    /// Worker threads for parallel simulation (default: all cores). Never
    /// changes the outputs.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Write circuit JSON files (and optionally OpenQASM) for an experiment.
    Generate(GenerateArgs),
    /// Simulate an experiment and write the survival dataset.
    Run(RunArgs),
    /// Fit a dataset, bootstrap the unitarity and plot the decay.
    Fit(FitArgs),
    /// Estimate the frame potential Φ₂ versus sequence length.
    FramePotential(FramePotentialArgs),
    /// Estimated versus true unitarity over random depolarizing strengths.
    Scatter(ScatterArgs),
    /// Re-execute the command recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignArgs {
    /// Number of qubits (even).
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Sequence lengths.
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 12, 16])]
    pub lengths: Vec<usize>,
    /// Circuits per sequence length.
    #[arg(long, default_value_t = 10)]
    pub circuits: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub design: DesignArgs,
    /// Also write an OpenQASM 2.0 file per circuit.
    #[arg(long)]
    pub qasm: bool,
    #[arg(long, env = OUT_ENV, default_value = "mirror-bench-out")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub design: DesignArgs,
    /// Read circuits from a `generate` output directory instead of sampling.
    #[arg(long)]
    pub circuits_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub shots: u64,
    /// Noise spec, repeatable: depolarizing:<p>, pauli:<px>,<py>,<pz>,
    /// amp_damp:<gamma>, unitary:<axis>,<theta>, dual:<spec>; suffix
    /// @inverse (mirrored half) or @single (single-qubit gates).
    #[arg(long)]
    pub noise: Vec<String>,
    /// stabilizer or dense.
    #[arg(long, default_value = "stabilizer")]
    pub backend: String,
    #[arg(long, env = OUT_ENV, default_value = "mirror-bench-out")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitArgs {
    /// Dataset written by `run` (CSV or JSON).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = OUT_ENV, default_value = "mirror-bench-out")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePotentialArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 6, 8, 10, 12, 14, 16])]
    pub lengths: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = OUT_ENV, default_value = "mirror-bench-out")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub experiments: usize,
    /// Depolarizing strengths are drawn uniformly from [0, pmax].
    #[arg(long, default_value_t = 0.01)]
    pub pmax: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 12, 16])]
    pub lengths: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub circuits: usize,
    #[arg(long, default_value_t = 100)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = OUT_ENV, default_value = "mirror-bench-out")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RerunArgs {
    /// A manifest.json written by any command.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<mirror_bench::Error> for CliError {
    fn from(e: mirror_bench::Error) -> Self {
        match e {
            mirror_bench::Error::Io(_) => CliError::Runtime(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || commands::execute(&cli.command);
    let result = match cli.jobs {
        Some(0) => Err(CliError::Config("--jobs must be positive".into())),
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(CliError::Runtime(e.to_string())),
        },
        None => run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mirror-bench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
