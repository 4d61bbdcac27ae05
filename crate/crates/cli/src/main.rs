//! `p4ladder` command-line driver.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 for usage or configuration errors, 3 for resource or integration
//! failures. Each run writes `summary.json` into its output directory.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use p4ladder::WeightType;

/// Environment variable holding the log filter, e.g. `info` or `debug`.
pub const LOG_ENV: &str = "P4LADDER_LOG";

#[derive(Parser, Debug)]
#[command(name = "p4ladder", version, about = "Exact ladder algebra of the fourth Painleve Hamiltonian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the exact operator identity suite.
    VerifyAlgebra(VerifyArgs),
    /// Build lowest- or highest-weight states and their support lattices.
    BuildStates(BuildArgs),
    /// Integrate P4, sample states on the grid and tabulate eigen-residuals.
    NumericRun(NumericArgs),
    /// Separable N-axis run: per-axis checks, weight check, energy table.
    Multidim(MultidimArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Largest n for the brute-force R_n / S_n checks.
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    /// Negate W3 inside Q+ and Q- (negative control).
    #[arg(long, hide = true)]
    pub flip_w3: bool,
    #[arg(long, default_value = "p4ladder-out")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    Lowest,
    Highest,
}

impl From<Kind> for WeightType {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Lowest => WeightType::Lowest,
            Kind::Highest => WeightType::Highest,
        }
    }
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n_max: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Abort once a state body exceeds this many terms.
    #[arg(long, default_value_t = p4ladder::states::DEFAULT_TERM_LIMIT)]
    pub term_limit: usize,
}

#[derive(Args, Debug)]
pub struct NumericArgs {
    /// JSON config; flags below override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub f0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub fp0: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub fd_order: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long, default_value = "p4ladder-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MultidimArgs {
    /// JSON config `{"axes": [...], "n_max": N}`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of default axes when no config is given.
    #[arg(long)]
    pub axes: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Keep every k-th grid point per axis in the product zero-mode export.
    #[arg(long, default_value_t = 20)]
    pub stride: usize,
    #[arg(long, default_value = "p4ladder-out")]
    pub out: PathBuf,
}

/// How a command ended, short of all checks passing.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Resource(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Resource(m) => write!(f, "{m}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VerifyAlgebra(a) => commands::verify_algebra(&a),
        Command::BuildStates(a) => commands::build_states(&a),
        Command::NumericRun(a) => commands::numeric_run(&a),
        Command::Multidim(a) => commands::multidim(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("p4ladder: {e}");
            ExitCode::from(e.code())
        }
    }
}
