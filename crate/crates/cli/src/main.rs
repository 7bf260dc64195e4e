//! `lincov`: autocovariances, filter weights and Berman/summability
//! diagnostics for stationary linear processes.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use lincov::diagnostics::{DEFAULT_EPSILON, DEFAULT_K_MAX, DEFAULT_K_MIN};

#[derive(Parser)]
#[command(
    name = "lincov",
    version,
    about = "Autocovariance calculus and condition diagnostics for linear time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(flatten)]
    Run(Run),
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Write outputs here instead of the recorded path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Every command that produces outputs and a manifest.
#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Run {
    /// Autocovariances of a model (or of its ψ/π filter) as CSV.
    Acvf(AcvfArgs),
    /// ψ or π weights of an ARMA/FARIMA model as CSV.
    Weights(WeightsArgs),
    /// Propagate an input acvf through a filter acvf.
    Compose(ComposeArgs),
    /// Berman and summability diagnostics on an acvf CSV.
    Check(CheckArgs),
    /// Filter an input model end to end and check the ξ inequalities.
    Theorem(TheoremArgs),
    /// Simulate a model, estimate its acvf and compare with the exact one.
    Simulate(SimulateArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Psi,
    Pi,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Common {
    /// Output file; the run manifest goes to `<output>.manifest.json`.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Exit with status 1 when a verdict is "fail".
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcvfArgs {
    /// Model spec JSON.
    pub model: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub k_max: usize,
    /// Emit γ^W of the model's ψ or π weights instead of the process acvf.
    #[arg(long, value_enum)]
    pub filter: Option<Direction>,
    /// Weight truncation (default: automatic).
    #[arg(long)]
    pub n_max: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsArgs {
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = Direction::Psi)]
    pub direction: Direction,
    /// Number of weights beyond ψ_0 (default: automatic for ARMA, 100000 for FARIMA).
    #[arg(long)]
    pub n_max: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposeArgs {
    /// Filter autocovariance CSV; needs a geometric or zero tail comment.
    pub gw: PathBuf,
    /// Input autocovariance CSV.
    pub gx: PathBuf,
    /// Highest output lag (default: as many as the input range allows).
    #[arg(long)]
    pub k_max: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckArgs {
    pub acvf: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_K_MIN)]
    pub k_min: usize,
    /// Default: 100000, or the last lag in the file if that is smaller.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremArgs {
    /// Model spec of the input process X.
    pub model: PathBuf,
    /// Model spec whose weights form the filter.
    pub filter: PathBuf,
    #[arg(long, value_enum, default_value_t = Direction::Pi)]
    pub direction: Direction,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_K_MIN)]
    pub k_min: usize,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Model spec with a "sim" object.
    pub model: PathBuf,
    /// Overrides sim.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lags of the empirical acvf written out (and used for standard errors).
    #[arg(long, default_value_t = 220)]
    pub k_max: usize,
    /// Lags 0..=this are compared with the exact acvf.
    #[arg(long, default_value_t = 20)]
    pub oracle_lags: usize,
    #[command(flatten)]
    pub common: Common,
}

impl Run {
    pub fn common(&self) -> &Common {
        match self {
            Run::Acvf(a) => &a.common,
            Run::Weights(a) => &a.common,
            Run::Compose(a) => &a.common,
            Run::Check(a) => &a.common,
            Run::Theorem(a) => &a.common,
            Run::Simulate(a) => &a.common,
        }
    }

    pub fn common_mut(&mut self) -> &mut Common {
        match self {
            Run::Acvf(a) => &mut a.common,
            Run::Weights(a) => &mut a.common,
            Run::Compose(a) => &mut a.common,
            Run::Check(a) => &mut a.common,
            Run::Theorem(a) => &mut a.common,
            Run::Simulate(a) => &mut a.common,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(run) => manifest::execute(run),
        Command::Replay { manifest, output } => manifest::replay(&manifest, output),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
