//! `zonecast` — regionalize gridded climate data and predict per region.
//!
//! Exit codes: 0 success, 2 input/validation error, 3 computation error.

mod commands;
mod manifest;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use zonecast_core::grid::ClimateVariable;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad inputs: unreadable files, schema violations, invalid specs.
    #[error("{0}")]
    Input(String),
    /// The computation itself failed: clustering, training, prediction.
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 3,
        }
    }

    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn compute(e: impl std::fmt::Display) -> Self {
        CliError::Compute(e.to_string())
    }
}

fn parse_variable(s: &str) -> Result<ClimateVariable, String> {
    ClimateVariable::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = ClimateVariable::ALL.iter().map(|v| v.name()).collect();
        format!(
            "unknown variable `{s}`; expected one of: {}",
            names.join(", ")
        )
    })
}

/// `auto` or a fixed region count.
#[derive(Debug, Clone, Copy)]
pub enum KChoice {
    Auto,
    Fixed(usize),
}

fn parse_k(s: &str) -> Result<KChoice, String> {
    if s == "auto" {
        return Ok(KChoice::Auto);
    }
    s.parse::<usize>()
        .map(KChoice::Fixed)
        .map_err(|_| format!("expected `auto` or a positive integer, got `{s}`"))
}

#[derive(Parser)]
#[command(
    name = "zonecast",
    version,
    about = "Climate regionalization and per-region prediction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Check a dataset CSV and print a summary.
    Validate(ValidateArgs),
    /// Generate a synthetic labeled dataset.
    Synth(SynthArgs),
    /// Cluster grid cells into climate regions.
    Cluster(ClusterArgs),
    /// Train one predictive model per region.
    Train(TrainArgs),
    /// Predict held-out years and evaluate per-region errors.
    PredictEvaluate(PredictEvaluateArgs),
    /// Run EM+SVR against KM+LR and tabulate per-region RMSE.
    Compare(CompareArgs),
    /// Render a per-cell field as an SVG heatmap.
    RenderMap(RenderMapArgs),
}

#[derive(Args)]
pub struct ValidateArgs {
    /// Dataset CSV.
    pub input: PathBuf,
    /// Grid resolution in degrees.
    #[arg(long, default_value_t = 2.5)]
    pub resolution: f64,
    /// Also export the full-period climatology CSV here.
    #[arg(long)]
    pub climatology: Option<PathBuf>,
    /// Where to write the run manifest.
    #[arg(long, default_value = "validate.manifest.json")]
    pub manifest: PathBuf,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Generator spec JSON; mutually exclusive with --default-table1.
    #[arg(long, conflicts_with = "default_table1")]
    pub spec: Option<PathBuf>,
    /// Use the built-in seven-region reference spec.
    #[arg(long = "default-table1")]
    pub default_table1: bool,
    /// Output dataset CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Output labels CSV (`lat,lon,true_region`).
    #[arg(long)]
    pub labels: PathBuf,
    /// Generator seed (overrides the spec file's seed).
    #[arg(long)]
    pub seed: u64,
    /// Where to write the run manifest (default: next to --out).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args)]
pub struct ClusterArgs {
    /// Dataset CSV.
    pub input: PathBuf,
    /// Clustering method.
    #[arg(long, value_parser = ["em", "kmeans"])]
    pub method: String,
    /// Region count: `auto` (cross-validated) or a fixed integer.
    #[arg(long, value_parser = parse_k, default_value = "auto")]
    pub k: KChoice,
    #[arg(long)]
    pub seed: u64,
    /// Cluster on the climatology of only the first N years.
    #[arg(long)]
    pub train_years: Option<usize>,
    #[arg(long, default_value_t = 2.5)]
    pub resolution: f64,
    /// Directory for model.json, regions.csv, and manifest.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Dataset CSV.
    pub input: PathBuf,
    /// Region assignment CSV (`lat,lon,region_id`).
    pub regions: PathBuf,
    /// Variable to predict.
    #[arg(long, value_parser = parse_variable)]
    pub target: ClimateVariable,
    /// Number of trailing years to hold out.
    #[arg(long)]
    pub p: usize,
    /// Regressor family.
    #[arg(long, value_parser = ["svr", "ols"])]
    pub model: String,
    #[arg(long)]
    pub seed: u64,
    /// Append the calendar year to the feature vector.
    #[arg(long)]
    pub with_year_feature: bool,
    #[arg(long, default_value_t = 2.5)]
    pub resolution: f64,
    /// Directory for models.json, cv_report.csv, and manifest.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct PredictEvaluateArgs {
    /// Dataset CSV.
    pub input: PathBuf,
    /// Region assignment CSV.
    pub regions: PathBuf,
    /// Trained models JSON.
    pub models: PathBuf,
    /// Number of trailing years to predict.
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 2.5)]
    pub resolution: f64,
    /// Directory for predictions.csv, report.csv, and manifest.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Dataset CSV.
    pub input: PathBuf,
    #[arg(long, value_parser = parse_variable)]
    pub target: ClimateVariable,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub seed: u64,
    /// Region count for both methods: `auto` or fixed.
    #[arg(long, value_parser = parse_k, default_value = "auto")]
    pub k: KChoice,
    #[arg(long)]
    pub with_year_feature: bool,
    #[arg(long, default_value_t = 2.5)]
    pub resolution: f64,
    /// Output comparison CSV.
    #[arg(long, default_value = "comparison.csv")]
    pub out: PathBuf,
    /// Where to write the run manifest (default: next to --out).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args)]
pub struct RenderMapArgs {
    /// CSV with lat, lon, and the field to render.
    pub values: PathBuf,
    /// Column to render; `region_id` gets a categorical palette.
    #[arg(long)]
    pub field: String,
    /// Output SVG path.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the run manifest (default: next to --out).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(args) => commands::validate(&args),
        Command::Synth(args) => commands::synth(&args),
        Command::Cluster(args) => commands::cluster(&args),
        Command::Train(args) => commands::train(&args),
        Command::PredictEvaluate(args) => commands::predict_evaluate(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::RenderMap(args) => commands::render_map(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
