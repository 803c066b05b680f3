use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "digitcast",
    version,
    about = "Probabilistic time-series forecasting with digit-level language models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample forecasts for every column of a CSV file.
    Forecast(ForecastArgs),
    /// Pick scaling and precision by validation likelihood over a grid.
    Tune(TuneArgs),
    /// Fit a Decimal AR density to one-dimensional samples.
    Densityfit(DensityFitArgs),
    /// Generate a synthetic series.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Http,
    DecimalAr,
    Replay,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    #[arg(long, value_enum)]
    pub backend: BackendKind,
    /// Fixture directory read by the replay backend.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Record every backend exchange as a fixture in this directory.
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Saved Decimal AR model for `--backend decimal-ar`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Train the Decimal AR model on each prompt instead of loading one.
    #[arg(long)]
    pub train_on_history: bool,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// CSV with one series per column.
    pub input: PathBuf,
    /// Steps to forecast.
    #[arg(long)]
    pub horizon: usize,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run directory to create.
    #[arg(long)]
    pub out: PathBuf,
    /// Observed future values; enables the metrics report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Overrides the sampling seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the number of samples of the config.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// CSV with one series per column.
    pub input: PathBuf,
    /// TOML grid file; the built-in 32-config grid when absent.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// TOML run configuration; grid axes override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run directory to create.
    #[arg(long)]
    pub out: PathBuf,
    /// Validation length; a fifth of the series by default.
    #[arg(long)]
    pub validation: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DensityFitArgs {
    /// CSV whose first column holds the samples.
    pub samples: PathBuf,
    /// Context length of the model, in characters.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[arg(long, default_value_t = 2)]
    pub precision: usize,
    #[arg(long, default_value_t = 0.1)]
    pub smoothing: f64,
    /// Fraction of the samples held out for the Wasserstein report.
    #[arg(long, default_value_t = 0.5)]
    pub holdout: f64,
    /// Draws from each fitted estimator.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run directory to create.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator name, e.g. sine, linear, square.
    #[arg(long)]
    pub name: String,
    /// Number of points.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Gaussian noise sd; the generator's default when absent.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Sd of the random shift of the time grid.
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mark interior points missing with this probability.
    #[arg(long)]
    pub missing: Option<f64>,
    /// CSV file to write.
    #[arg(long)]
    pub out: PathBuf,
}
