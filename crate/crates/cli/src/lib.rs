//! Command-line front end: dataset statistics, training, prediction,
//! evaluation, cross-validation and wall-clock benchmarking.
//!
//! Primary results go to the `out` stream and are byte-identical across
//! runs with the same flags; wall-clock timings go to the `err` stream.

pub mod bench;
pub mod commands;
pub mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mlelm_core::data::LabelPosition;
use mlelm_core::elm::{Activation, ElmConfig, Ridge, ThresholdMode};
use mlelm_core::Error;

pub use bench::TimingReport;

/// Exit status: success.
pub const EXIT_OK: i32 = 0;
/// Exit status: load, parse, shape or numerical failure.
pub const EXIT_ERROR: i32 = 1;
/// Exit status: dataset does not match its expected specification.
pub const EXIT_SPEC_MISMATCH: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mlelm", version, about = "Extreme learning machine multi-label classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print sample/feature/label counts, label cardinality and density.
    Stats(StatsArgs),
    /// Train a model and write it in MLELM1 format.
    Train(TrainArgs),
    /// Predict label sets, one line per sample.
    Predict(PredictArgs),
    /// Score a model (or a prediction file) against a labeled dataset.
    Evaluate(EvaluateArgs),
    /// k-fold cross-validation, reported as mean(±std) per metric.
    Crossval(CrossvalArgs),
    /// Median wall-clock training and testing time per dataset.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset file (.arff, otherwise delimited text).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Number of label attributes/columns.
    #[arg(long = "labels")]
    pub label_count: usize,
    /// Labels are the first attributes instead of the last (ARFF only).
    #[arg(long)]
    pub labels_first: bool,
    /// Field delimiter for delimited files.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

impl DataArgs {
    pub fn position(&self) -> LabelPosition {
        if self.labels_first {
            LabelPosition::Start
        } else {
            LabelPosition::End
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Hidden neurons; defaults to min(1000, 10·labels + 2·features).
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long, default_value = "sigmoid", value_parser = parse_activation)]
    pub activation: Activation,
    /// Gram-matrix ridge: 'auto' or a non-negative number (0 = exact pseudoinverse).
    #[arg(long, default_value = "auto", value_parser = parse_ridge)]
    pub ridge: Ridge,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// 'auto' (calibrated on training outputs) or 'fixed:<value>'.
    #[arg(long, default_value = "auto", value_parser = parse_threshold)]
    pub threshold: ThresholdMode,
    /// Predict the top-scoring label when no score clears the threshold.
    #[arg(long)]
    pub top1: bool,
}

impl ModelArgs {
    pub fn config(&self, features: usize, labels: usize) -> ElmConfig {
        let mut c = ElmConfig::new(self.hidden.unwrap_or_else(|| ElmConfig::default_hidden(features, labels)))
            .with_activation(self.activation)
            .with_ridge(self.ridge)
            .with_seed(self.seed)
            .with_threshold(self.threshold);
        c.top1_fallback = self.top1;
        c
    }
}

fn parse_activation(s: &str) -> Result<Activation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_ridge(s: &str) -> Result<Ridge, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_threshold(s: &str) -> Result<ThresholdMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Compare against a built-in benchmark specification by name (e.g. yeast).
    #[arg(long, conflicts_with = "expect_file")]
    pub expect: Option<String>,
    /// Compare against a key=value specification file.
    #[arg(long)]
    pub expect_file: Option<PathBuf>,
    /// Write key=value results to this path.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model_args: ModelArgs,
    /// Output model file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Feature file. Delimited files may hold D feature columns or D+M
    /// columns (trailing labels ignored); ARFF files must carry the labels.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Label count of an ARFF input; defaults to the model's label count.
    #[arg(long = "labels")]
    pub label_count: Option<usize>,
    #[arg(long)]
    pub labels_first: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Append a tab and the comma-separated raw scores to each line.
    #[arg(long)]
    pub scores: bool,
    /// Prediction file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, required_unless_present = "predictions", conflicts_with = "predictions")]
    pub model: Option<PathBuf>,
    /// Score an existing prediction file instead of running a model.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model_args: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Dataset files; repeat the flag for several datasets.
    #[arg(long = "dataset", required = true)]
    pub datasets: Vec<PathBuf>,
    /// Label counts, one per dataset or a single value for all.
    #[arg(long = "labels", required = true)]
    pub label_counts: Vec<usize>,
    #[arg(long)]
    pub labels_first: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[command(flatten)]
    pub model_args: ModelArgs,
    /// Fraction of each dataset held out for the testing-time measurement.
    #[arg(long, default_value_t = 0.3)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Also time training on these subsample fractions of each training set.
    #[arg(long, value_delimiter = ',')]
    pub scaling: Vec<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run_from_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Stats(a) => commands::cmd_stats(a, out, err),
        Command::Train(a) => commands::cmd_train(a, out, err),
        Command::Predict(a) => commands::cmd_predict(a, out, err),
        Command::Evaluate(a) => commands::cmd_evaluate(a, out, err),
        Command::Crossval(a) => commands::cmd_crossval(a, out, err),
        Command::Bench(a) => bench::cmd_bench(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
