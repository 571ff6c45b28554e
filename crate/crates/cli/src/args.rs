use std::path::PathBuf;

use bmabo::bma::AcquisitionVariant;
use bmabo::engine::{BatchStrategy, Mode, Policy};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bmabo", version, about = "Pool-based BO and BMA campaigns over tabular experiment data")]
pub struct Cli {
    /// Log verbosity (error, warn, info, debug, trace). RUST_LOG overrides it.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run repeated seeded campaigns and write results, summary, weights and manifest.
    Run(RunArgs),
    /// Summarize two or more results files side by side.
    Compare(CompareArgs),
    /// Check a data file and spec config without running anything.
    Validate(ValidateArgs),
    /// Write a synthetic data file whose response depends on one model's features.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Bo,
    Bma,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bo => Mode::Bo,
            ModeArg::Bma => Mode::Bma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AcqArg {
    WeightedEi,
    MixtureEi,
}

impl From<AcqArg> for AcquisitionVariant {
    fn from(a: AcqArg) -> AcquisitionVariant {
        match a {
            AcqArg::WeightedEi => AcquisitionVariant::WeightedEi,
            AcqArg::MixtureEi => AcquisitionVariant::MixtureEi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Ei,
    Random,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Policy {
        match p {
            PolicyArg::Ei => Policy::Ei,
            PolicyArg::Random => Policy::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BatchArg {
    TopQ,
    ConstantLiar,
}

impl From<BatchArg> for BatchStrategy {
    fn from(b: BatchArg) -> BatchStrategy {
        match b {
            BatchArg::TopQ => BatchStrategy::TopQ,
            BatchArg::ConstantLiar => BatchStrategy::ConstantLiar,
        }
    }
}

/// Data and model options shared by `run` and `validate`.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Comma- or tab-delimited data file with a header row.
    #[arg(long)]
    pub data: PathBuf,

    /// TOML model config. Defaults to the all-feature model for `bo` and the
    /// three fatigue models for `bma`.
    #[arg(long)]
    pub specs: Option<PathBuf>,

    /// Name of the response column.
    #[arg(long, default_value = bmabo::dataset::NIMS_RESPONSE)]
    pub response: String,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, value_enum, default_value = "bma")]
    pub mode: ModeArg,

    /// Initial random experiments per run.
    #[arg(long, default_value_t = 5)]
    pub n_init: usize,

    /// Experiments added per iteration.
    #[arg(long, default_value_t = 3)]
    pub batch: usize,

    #[arg(long, default_value_t = 40)]
    pub iters: usize,

    #[arg(long, default_value_t = 20)]
    pub runs: usize,

    /// Base seed; run i uses a seed derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,

    #[arg(long, value_enum, default_value = "weighted-ei")]
    pub acq_variant: AcqArg,

    #[arg(long, value_enum, default_value = "ei")]
    pub policy: PolicyArg,

    #[arg(long, value_enum, default_value = "top-q")]
    pub batch_strategy: BatchArg,

    /// Start each refit from the previous iteration's hyperparameters.
    #[arg(long)]
    pub warm_start: bool,

    /// Worker threads for repeated runs. Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,

    /// Hyperparameter optimizer restarts per fit.
    #[arg(long, default_value_t = 5)]
    pub gp_restarts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Results files written by `run`.
    #[arg(required = true, num_args = 2..)]
    pub results: Vec<PathBuf>,

    /// Row labels, one per results file. Defaults to the file paths.
    #[arg(long, num_args = 1..)]
    pub labels: Vec<String>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, value_enum, default_value = "bma")]
    pub mode: ModeArg,

    #[arg(long, default_value_t = 5)]
    pub n_init: usize,

    #[arg(long, default_value_t = 3)]
    pub batch: usize,

    #[arg(long, default_value_t = 40)]
    pub iters: usize,

    /// Total experiment budget to check instead of n_init + batch * iters.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, default_value_t = 437)]
    pub rows: usize,

    /// Standard deviation of the additive response noise.
    #[arg(long, default_value_t = 10.0)]
    pub noise: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Model config holding the generating model.
    #[arg(long)]
    pub specs: Option<PathBuf>,

    /// Generating model name; the first model in the config by default.
    #[arg(long)]
    pub model: Option<String>,
}
