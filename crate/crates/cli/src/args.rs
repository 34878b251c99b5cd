//! Command-line arguments of each subcommand.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

#[derive(Args)]
pub struct InfoArgs {
    /// State file (JSON).
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Ensemble file (JSON); needs --channel.
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    /// Built-in channel such as `dephasing(0.1)`, or a channel file.
    #[arg(long)]
    pub channel: Option<String>,
    /// Label of the source system in the state.
    #[arg(long = "a", default_value = "A")]
    pub a_label: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct KidArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long = "a", default_value = "A")]
    pub a_label: String,
    /// Seed of the generic elements used to split the algebra.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct Budget {
    /// Optimizer restarts per weight.
    #[arg(long, default_value_t = 24)]
    pub restarts: usize,
    /// Iteration cap per restart.
    #[arg(long, default_value_t = 300)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub channel: String,
    /// Number of channel uses per block.
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    /// Number of weights on the Chebyshev grid.
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    #[command(flatten)]
    pub budget: Budget,
    /// Output format; defaults to JSON when --out ends in `.json`, CSV otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CapacityArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long = "a", default_value = "A")]
    pub a_label: String,
    #[arg(long)]
    pub channel: String,
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    #[command(flatten)]
    pub budget: Budget,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CoreArgs {
    /// Random instances per check.
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ConverseArgs {
    /// Source state: labels C, Q, R for a source already in block form,
    /// anything else is decomposed first. Built-in sources when omitted.
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long = "a", default_value = "A")]
    pub a_label: String,
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.02,0.05,0.1")]
    pub eps_grid: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 40)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TypicalityArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.7")]
    pub dist: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AllArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
