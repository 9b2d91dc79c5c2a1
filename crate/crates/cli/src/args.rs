use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Bayesian superstatistics for financial log-returns.
///
/// Every flag may also be given in a flat JSON object passed with
/// `--config`, keyed by the long flag name; flags on the command line win.
#[derive(Debug, Parser, Serialize)]
#[command(name = "superstat", version, args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Flat JSON file of flag values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Resample a price CSV and write signed and absolute log-returns.
    Ingest(IngestArgs),
    /// ACF, periodogram, ADF test and histogram of a return series.
    Diagnose(DiagnoseArgs),
    /// Estimate θ by random-walk Metropolis.
    Fit(FitArgs),
    /// Repeated Monte-Carlo Bayes factors, inverse-Gamma vs log-normal.
    Compare(CompareArgs),
    /// Generate a superstatistical price/return fixture.
    Simulate(SimulateArgs),
    /// Predictive return density on a grid.
    Predict(PredictArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Diagnose(_) => "diagnose",
            Command::Fit(_) => "fit",
            Command::Compare(_) => "compare",
            Command::Simulate(_) => "simulate",
            Command::Predict(_) => "predict",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimescaleArg {
    Minute,
    Hour,
    #[value(name = "4hour")]
    #[serde(rename = "4hour")]
    FourHour,
    Day,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Iga,
    Logn,
    Sichi2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Standard,
    Greedy,
}

/// Hyperparameters of the mixing law; which ones apply depends on the model.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct HyperArgs {
    /// Inverse-Gamma shape.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Inverse-Gamma scale.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Log-normal scale.
    #[arg(long)]
    pub s: Option<f64>,
    /// Scaled inverse-χ² degrees of freedom.
    #[arg(long)]
    pub nu0: Option<f64>,
    /// Scaled inverse-χ² scale.
    #[arg(long)]
    pub sigma0_sq: Option<f64>,
    /// Likelihood mean.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct IngestArgs {
    /// `timestamp,price` CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub timescale: TimescaleArg,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DiagnoseArgs {
    /// `timestamp,value` return CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub max_lag: usize,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Largest ADF lag considered (default ⌈12 (n/100)^¼⌉).
    #[arg(long)]
    pub adf_max_lags: Option<usize>,
    /// Analyse signed values instead of absolute returns.
    #[arg(long)]
    pub signed: bool,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "iga")]
    pub model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, value_enum, default_value = "standard")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    /// Default: a tenth of the iterations in standard mode, none in greedy.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Random-walk standard deviation (default 0.1 × initial θ).
    #[arg(long)]
    pub step: Option<f64>,
    /// Gradient nudge rate (default 1e-3 greedy, 0 standard).
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long)]
    pub initial_theta: Option<f64>,
    /// Prior draws per candidate when hyperparameters are grid-fitted.
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    /// Per-block evidence for the hyperparameter fit.
    #[arg(long)]
    pub block_length: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `--alpha/--beta` fix the inverse-Gamma side and `--s` the log-normal
    /// side; missing ones are grid-fitted.
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: HyperArgs,
    #[arg(long, default_value_t = 1000)]
    pub n_series: usize,
    /// Prior draws per model per repetition.
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    /// Give each run of this many observations its own θ.
    #[arg(long)]
    pub block_length: Option<usize>,
    /// Compare on absolute instead of signed returns.
    #[arg(long)]
    pub abs: bool,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "iga")]
    pub model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: HyperArgs,
    /// Number of returns.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Observations per θ regime.
    #[arg(long, default_value_t = 100)]
    pub block: usize,
    #[arg(long, default_value_t = 100.0)]
    pub p0: f64,
    /// First timestamp, RFC 3339.
    #[arg(long, default_value = "2020-01-01T00:00:00Z")]
    pub start: String,
    /// Seconds between prices.
    #[arg(long, default_value_t = 60)]
    pub step: i64,
    /// Do not write the latent θ path.
    #[arg(long)]
    pub no_theta: bool,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PredictArgs {
    #[arg(long, value_enum, default_value = "iga")]
    pub model: ModelArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub hyper: HyperArgs,
    /// Default: −10 predictive scales (0 with `--abs`).
    #[arg(long, allow_hyphen_values = true)]
    pub grid_min: Option<f64>,
    /// Default: +10 predictive scales.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_max: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub grid_points: usize,
    /// Density of |X| instead of X.
    #[arg(long)]
    pub abs: bool,
    /// Absolute quadrature tolerance per point.
    #[arg(long, default_value_t = superstat::predictive::DEFAULT_TOL)]
    pub tol: f64,
}
