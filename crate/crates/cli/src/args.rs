use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use tsclust::pipeline::KChoice;

#[derive(Debug, Parser)]
#[command(
    name = "tsc",
    version,
    about = "Cluster price series by volatility and return, then learn the labels with an autoencoder"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute features from prices and write k-means labels.
    Label(LabelArgs),
    /// Sweep k and write the silhouette score of each.
    SelectK(SelectKArgs),
    /// Train the autoencoder on a labels CSV.
    Train(TrainArgs),
    /// Predict cluster labels with a trained model.
    Predict(PredictArgs),
    /// Compare predictions against k-means labels.
    Evaluate(EvaluateArgs),
    /// Run both stages end to end and write a manifest.
    Run(RunArgs),
    /// Draw charts from the artifacts of a run.
    Report(ReportArgs),
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, tsclust::ingest::DATE_FORMAT).map_err(|e| format!("expected YYYY-MM-DD: {e}"))
}

fn parse_k(s: &str) -> Result<KChoice, String> {
    s.parse()
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(f) if f > 0.0 && f < 1.0 => Ok(f),
        Ok(f) => Err(format!("{f} is not in (0, 1)")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_days(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(d) if d.is_finite() && d > 0.0 => Ok(d),
        Ok(d) => Err(format!("{d} is not a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct PriceArgs {
    /// Prices CSV with header `ticker,date,adj_close`.
    #[arg(long)]
    pub prices: PathBuf,
    /// Ticker list (one per line or comma separated); other tickers are skipped.
    #[arg(long)]
    pub tickers: Option<PathBuf>,
    /// Drop rows dated before this day (YYYY-MM-DD).
    #[arg(long, value_parser = parse_date)]
    pub start_date: Option<NaiveDate>,
    /// Trading days per year used to annualize.
    #[arg(long, default_value_t = 252.0, value_parser = parse_days)]
    pub trading_days: f64,
}

#[derive(Debug, Clone, Args)]
pub struct KRangeArgs {
    /// Smallest k tried by the silhouette sweep.
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    /// Largest k tried by the silhouette sweep (capped at tickers - 1).
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
}

#[derive(Debug, Clone, Args)]
pub struct LabelArgs {
    #[command(flatten)]
    pub prices: PriceArgs,
    /// Number of clusters, or `auto` to pick by silhouette.
    #[arg(long, default_value = "4", value_parser = parse_k)]
    pub k: KChoice,
    #[command(flatten)]
    pub range: KRangeArgs,
    /// Random seed.
    #[arg(long, env = "TSC_SEED", default_value_t = 7)]
    pub seed: u64,
    /// Renumber clusters by descending mean return.
    #[arg(long)]
    pub canonical_labels: bool,
    /// Labels CSV to write.
    #[arg(long, default_value = "labels.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SelectKArgs {
    #[command(flatten)]
    pub prices: PriceArgs,
    #[command(flatten)]
    pub range: KRangeArgs,
    /// Random seed.
    #[arg(long, env = "TSC_SEED", default_value_t = 7)]
    pub seed: u64,
    /// `k,silhouette` CSV to write.
    #[arg(long, default_value = "k_sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Training records, `ticker,volatility,return,cluster`.
    #[arg(long)]
    pub labels: PathBuf,
    /// Bottleneck width; defaults to the largest label + 1.
    #[arg(long, value_parser = parse_positive)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1000, value_parser = parse_positive)]
    pub epochs: usize,
    /// Minibatch size; at least the row count means full batch.
    #[arg(long, default_value_t = 1024, value_parser = parse_positive)]
    pub batch: usize,
    /// Random seed.
    #[arg(long, env = "TSC_SEED", default_value_t = 7)]
    pub seed: u64,
    /// Model file to write.
    #[arg(long, default_value = "model.tscnet")]
    pub model: PathBuf,
    /// `epoch,loss` CSV to write.
    #[arg(long, default_value = "loss.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Records to label, `ticker,volatility,return[,cluster]`.
    #[arg(long)]
    pub labels: PathBuf,
    /// Number of clusters; defaults to the model's bottleneck width.
    #[arg(long, value_parser = parse_positive)]
    pub k: Option<usize>,
    /// Predictions CSV to write.
    #[arg(long, default_value = "predictions.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Test records with their k-means labels.
    #[arg(long)]
    pub labels: PathBuf,
    /// Number of clusters; defaults to the model's bottleneck width.
    #[arg(long, value_parser = parse_positive)]
    pub k: Option<usize>,
    /// Evaluation CSV to write.
    #[arg(long, default_value = "evaluation.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML config; flags given on the command line override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prices CSV with header `ticker,date,adj_close`.
    #[arg(long)]
    pub prices: Option<PathBuf>,
    /// Ticker list (one per line or comma separated).
    #[arg(long)]
    pub tickers: Option<PathBuf>,
    /// Drop rows dated before this day (YYYY-MM-DD).
    #[arg(long, value_parser = parse_date)]
    pub start_date: Option<NaiveDate>,
    /// Number of clusters, or `auto`.
    #[arg(long, value_parser = parse_k)]
    pub k: Option<KChoice>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Random seed for clustering, split and training.
    #[arg(long, env = "TSC_SEED")]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_positive)]
    pub epochs: Option<usize>,
    #[arg(long, value_parser = parse_positive)]
    pub batch: Option<usize>,
    /// Fraction of records held out for testing.
    #[arg(long, value_parser = parse_fraction)]
    pub test_frac: Option<f64>,
    /// Trading days per year used to annualize.
    #[arg(long, value_parser = parse_days)]
    pub trading_days: Option<f64>,
    /// Directory for the artifacts and manifest.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Renumber clusters by descending mean return.
    #[arg(long)]
    pub canonical_labels: bool,
    /// Hold out the same fraction of every cluster.
    #[arg(long)]
    pub stratify: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Directory holding `k_sweep.csv`, `loss.csv` and `evaluation.csv`.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Directory for the charts; defaults to `<out-dir>/report`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
