//! `dfl`: generate instances, train and evaluate linear cost predictors,
//! export their bilevel reformulations and run the benchmark suites.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<dfl_core::Error> for CliError {
    fn from(e: dfl_core::Error) -> Self {
        use dfl_core::Error as E;
        match e {
            E::InvalidParam(_) | E::InvalidDimension(_) => CliError::Usage(e.to_string()),
            E::Io(_) | E::Schema(_) => CliError::Io(e.to_string()),
            E::MalformedProblem(_)
            | E::NumericalFailure(_)
            | E::Infeasible(_)
            | E::Unbounded(_)
            | E::DegenerateNormalization(_) => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dfl", version, about = "Decision-focused linear predictors scored by pessimistic regret")]
#[command(args_override_self = true)]
pub struct Cli {
    /// TOML file with one table of flag values per subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    #[command(args_override_self = true)]
    Gen(GenArgs),
    /// Train a model with SPO+, local search and alternating descent.
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Score a model on a dataset split.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Decide whether some linear model has zero pessimistic regret.
    #[command(args_override_self = true)]
    ZeroRegret(ZeroRegretArgs),
    /// Write the single-level reformulation in LP format.
    #[command(args_override_self = true)]
    ExportQcqp(ExportArgs),
    /// Run a benchmark suite and emit CSV.
    #[command(args_override_self = true)]
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    /// Shortest path on a grid.
    Sp,
    /// Bipartite matching.
    Bm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OmegaLawArg {
    Bernoulli,
    Normal,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    /// Grid size as ROWSxCOLS.
    #[arg(long, default_value = "5x5")]
    pub grid: String,
    #[arg(long, default_value_t = 13)]
    pub left: usize,
    #[arg(long, default_value_t = 12)]
    pub right: usize,
    #[arg(long, default_value_t = 40)]
    pub edges: usize,
    /// Number of samples.
    #[arg(long = "n", default_value_t = 100)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 5)]
    pub features: usize,
    #[arg(long, default_value_t = 2)]
    pub deg: u32,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "bernoulli")]
    pub omega_law: OmegaLawArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Dash-separated stages, e.g. spo, spo-ls, spo-ls-alt, or ls with --init.
    #[arg(long, default_value = "spo-ls-alt")]
    pub method: String,
    /// Starting model; required when the method does not begin with spo.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Local-search time budget in seconds, before scaling.
    #[arg(long)]
    pub budget_ls: Option<f64>,
    /// Alternating-descent time budget in seconds, before scaling.
    #[arg(long)]
    pub budget_alt: Option<f64>,
    /// Multiplier applied to both budgets.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub ls_iters: Option<usize>,
    #[arg(long)]
    pub ls_samples: Option<usize>,
    /// Local-search neighbourhood scale; defaults by problem family.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub alt_iters: Option<usize>,
    #[arg(long)]
    pub omega_bound: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fit without an intercept column.
    #[arg(long)]
    pub no_bias: bool,
    /// Model JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Trace JSON output; defaults to `<out>.trace.json`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
    All,
}

impl SplitArg {
    pub fn kind(self) -> dfl_core::datagen::SplitKind {
        use dfl_core::datagen::SplitKind;
        match self {
            SplitArg::Train => SplitKind::Train,
            SplitArg::Test => SplitKind::Test,
            SplitArg::All => SplitKind::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub split: SplitArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ZeroRegretArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub split: SplitArg,
    #[arg(long)]
    pub no_bias: bool,
    /// Where to write the certificate model when the answer is yes.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Exact,
    Penalized,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "train")]
    pub split: SplitArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub variant: VariantArg,
    /// Fixed `gamma` of the penalized variant.
    #[arg(long, default_value_t = dfl_core::qcqp::DEFAULT_KAPPA)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub omega_bound: f64,
    /// Leave out the dual cut-off row of the exact variant.
    #[arg(long)]
    pub no_cutoff: bool,
    #[arg(long)]
    pub no_bias: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// tiny or paper-small.
    #[arg(long)]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplier on the full-scale 20/40-minute budgets.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Instances trained concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub ls_iters: Option<usize>,
    #[arg(long)]
    pub alt_iters: Option<usize>,
    #[arg(long)]
    pub no_bias: bool,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print percent change of normalized regret against SPO instead of CSV.
    #[arg(long)]
    pub summary: bool,
    /// Directory for datasets, models and the seed manifest.
    #[arg(long)]
    pub artifacts: Option<PathBuf>,
}

fn run() -> Result<(), CliError> {
    let args = config::expand(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match cli.command {
        Command::Gen(a) => commands::generate(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::ZeroRegret(a) => commands::zero_regret(&a),
        Command::ExportQcqp(a) => commands::export_qcqp(&a),
        Command::Bench(a) => commands::bench(&a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
