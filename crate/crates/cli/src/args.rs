use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use cpd_core::hmc::MetricKind;
use cpd_core::ingest::Target;
use cpd_core::model::{LikelihoodKind, SigmaUpper};
use cpd_core::report::EventWindow;
use cpd_core::Result;

use crate::settings::Settings;

/// Bayesian change-point estimation for weekly review counts.
///
/// Exit codes: 0 success, 1 I/O error, 2 invalid input or configuration,
/// 3 sampler did not converge (outputs are still written).
#[derive(Debug, Parser)]
#[command(name = "cpd", version)]
pub struct Cli {
    /// `key = value` config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a review CSV into a weekly series CSV (plus rejects report).
    Ingest(IngestCmd),
    /// Sample the change-point posterior of a weekly series.
    Fit(FitCmd),
    /// Change-point estimate, predictive band, plots and result JSON from a fit.
    Report(ReportCmd),
    /// Generate a synthetic weekly series with a known change point.
    Synth(SynthCmd),
    /// Ingest, fit and report in one go.
    Run(RunCmd),
}

#[derive(Debug, Args)]
pub struct IngestFlags {
    #[arg(long, value_name = "NAME")]
    pub col_date: Option<String>,
    #[arg(long, value_name = "NAME")]
    pub col_rating: Option<String>,
    #[arg(long, value_name = "NAME")]
    pub col_category: Option<String>,
    /// Keep only this category (after normalization).
    #[arg(long)]
    pub category: Option<String>,
    /// Drop reviews before this year.
    #[arg(long)]
    pub min_year: Option<i32>,
    /// Category merge rules (`raw => canonical` per line).
    #[arg(long, value_name = "PATH")]
    pub category_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelFlags {
    /// Which sentiment series to model.
    #[arg(long)]
    pub sentiment: Option<Target>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Uniform noise prior bound: `auto` or a positive number.
    #[arg(long)]
    pub sigma_upper: Option<SigmaUpper>,
    #[arg(long)]
    pub slope_sd: Option<f64>,
    /// Logistic switch sharpness in 1/weeks; 0 selects the hard switch.
    #[arg(long)]
    pub sharpness: Option<f64>,
    #[arg(long)]
    pub likelihood: Option<LikelihoodKind>,
}

#[derive(Debug, Args)]
pub struct SamplerFlags {
    /// Post-warmup draws per chain.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Initial leapfrog step size.
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub leapfrog_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub target_accept: Option<f64>,
    /// Inverse mass matrix: `dense` (adapted) or `identity`.
    #[arg(long)]
    pub metric: Option<MetricKind>,
    /// Leading fraction of warmup spent annealing the target.
    #[arg(long)]
    pub anneal_fraction: Option<f64>,
    /// Per-transition step shrink fraction `j` (step · U(1 − j, 1]).
    #[arg(long)]
    pub step_size_jitter: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportFlags {
    /// Change-point dates inside this window get `in_window: true`.
    #[arg(long, value_name = "YYYY-MM-DD:YYYY-MM-DD")]
    pub event_window: Option<EventWindow>,
    /// Predictive band level.
    #[arg(long)]
    pub band: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IngestCmd {
    /// Review CSV with a header row.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Weekly series CSV to write; `manifest.json` and `rejects.csv` go beside it.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long)]
    pub sentiment: Option<Target>,
    #[command(flatten)]
    pub ingest: IngestFlags,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    /// Weekly series CSV.
    #[arg(long, value_name = "PATH")]
    pub series: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub sampler: SamplerFlags,
}

#[derive(Debug, Args)]
pub struct ReportCmd {
    #[arg(long, value_name = "PATH")]
    pub series: PathBuf,
    /// Directory written by `fit`.
    #[arg(long, value_name = "DIR")]
    pub fit_dir: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub report: ReportFlags,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    #[arg(long, default_value_t = 0.004, allow_hyphen_values = true)]
    pub w1: f64,
    #[arg(long, default_value_t = -0.006, allow_hyphen_values = true)]
    pub w2: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub b1: f64,
    #[arg(long, default_value_t = 4.5, allow_hyphen_values = true)]
    pub b2: f64,
    #[arg(long, default_value_t = 0.75)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
    /// Number of weeks.
    #[arg(long = "T", default_value_t = 400)]
    pub len: usize,
    #[arg(long, default_value_t = LikelihoodKind::Normal)]
    pub noise: LikelihoodKind,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "2013-01-07")]
    pub start_date: NaiveDate,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunCmd {
    /// Review CSV with a header row.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub ingest: IngestFlags,
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub sampler: SamplerFlags,
    #[command(flatten)]
    pub report: ReportFlags,
}

macro_rules! overlay {
    ($settings:expr, $($key:literal => $value:expr),* $(,)?) => {{
        $(
            if let Some(v) = &$value {
                $settings.set($key, &v.to_string())?;
            }
        )*
    }};
}

impl IngestFlags {
    pub fn apply(&self, s: &mut Settings) -> Result<()> {
        overlay!(s,
            "col_date" => self.col_date,
            "col_rating" => self.col_rating,
            "col_category" => self.col_category,
            "category" => self.category,
            "min_year" => self.min_year,
        );
        if let Some(p) = &self.category_map {
            s.ingest.category_map = Some(p.clone());
        }
        Ok(())
    }
}

impl ModelFlags {
    pub fn apply(&self, s: &mut Settings) -> Result<()> {
        overlay!(s,
            "sentiment" => self.sentiment,
            "alpha" => self.alpha,
            "beta" => self.beta,
            "sigma_upper" => self.sigma_upper,
            "slope_sd" => self.slope_sd,
            "sharpness" => self.sharpness,
            "likelihood" => self.likelihood,
        );
        Ok(())
    }
}

impl SamplerFlags {
    pub fn apply(&self, s: &mut Settings) -> Result<()> {
        overlay!(s,
            "samples" => self.samples,
            "chains" => self.chains,
            "warmup" => self.warmup,
            "step_size" => self.step_size,
            "leapfrog_steps" => self.leapfrog_steps,
            "seed" => self.seed,
            "target_accept" => self.target_accept,
            "metric" => self.metric,
            "anneal_fraction" => self.anneal_fraction,
            "step_size_jitter" => self.step_size_jitter,
        );
        Ok(())
    }
}

impl ReportFlags {
    pub fn apply(&self, s: &mut Settings) -> Result<()> {
        if let Some(w) = self.event_window {
            s.report.event_window = Some(w);
        }
        overlay!(s, "band" => self.band);
        Ok(())
    }
}
