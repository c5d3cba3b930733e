//! Resolved configuration shared by every subcommand.
//!
//! Precedence is built-in defaults, then the `--config` file, then flags.
//! The file is `key = value` per line with `#` comments; keys match the
//! long flag names, with `-` and `_` interchangeable.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use cpd_core::hmc::{HmcConfig, MetricKind};
use cpd_core::ingest::{ColumnSchema, Target};
use cpd_core::model::{LikelihoodKind, ModelConfig, SigmaUpper};
use cpd_core::report::{EventWindow, DEFAULT_BAND};
use cpd_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSettings {
    pub col_date: String,
    pub col_rating: String,
    pub col_category: String,
    pub category: Option<String>,
    pub min_year: i32,
    pub category_map: Option<PathBuf>,
}

impl Default for IngestSettings {
    fn default() -> Self {
        let c = ColumnSchema::default();
        Self {
            col_date: c.date,
            col_rating: c.rating,
            col_category: c.category,
            category: None,
            min_year: 2013,
            category_map: None,
        }
    }
}

impl IngestSettings {
    pub fn schema(&self) -> ColumnSchema {
        ColumnSchema {
            date: self.col_date.clone(),
            rating: self.col_rating.clone(),
            category: self.col_category.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub band: f64,
    pub event_window: Option<EventWindow>,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self { band: DEFAULT_BAND, event_window: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Settings {
    pub ingest: IngestSettings,
    pub sentiment: Target,
    pub model: ModelConfig,
    pub sampler: HmcConfig,
    pub report: ReportSettings,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| Error::Config(format!("{key} = {value:?}: {e}")))
}

fn non_empty(value: &str) -> Option<String> {
    let v = value.trim();
    (!v.is_empty()).then(|| v.to_string())
}

impl Settings {
    /// Set one value by key; the same keys are accepted in config files.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = key.trim().to_ascii_lowercase().replace('-', "_");
        let v = value.trim();
        match k.as_str() {
            "col_date" => self.ingest.col_date = v.to_string(),
            "col_rating" => self.ingest.col_rating = v.to_string(),
            "col_category" => self.ingest.col_category = v.to_string(),
            "category" => self.ingest.category = non_empty(v),
            "min_year" => self.ingest.min_year = parse(&k, v)?,
            "category_map" => self.ingest.category_map = non_empty(v).map(PathBuf::from),
            "sentiment" => self.sentiment = parse(&k, v)?,
            "alpha" => self.model.alpha = parse(&k, v)?,
            "beta" => self.model.beta = parse(&k, v)?,
            "sigma_upper" => self.model.sigma_upper = parse::<SigmaUpper>(&k, v)?,
            "slope_sd" => self.model.slope_sd = parse(&k, v)?,
            "sharpness" => self.model.sharpness = parse(&k, v)?,
            "likelihood" => self.model.likelihood = parse::<LikelihoodKind>(&k, v)?,
            "samples" => self.sampler.num_samples = parse(&k, v)?,
            "chains" => self.sampler.num_chains = parse(&k, v)?,
            "warmup" => self.sampler.warmup_steps = parse(&k, v)?,
            "step_size" => self.sampler.initial_step_size = parse(&k, v)?,
            "leapfrog_steps" => self.sampler.num_leapfrog_steps = parse(&k, v)?,
            "target_accept" => self.sampler.target_accept = parse(&k, v)?,
            "divergence_threshold" => self.sampler.divergence_energy_threshold = parse(&k, v)?,
            "seed" => self.sampler.seed = parse(&k, v)?,
            "metric" => self.sampler.metric = parse::<MetricKind>(&k, v)?,
            "anneal_fraction" => self.sampler.anneal_fraction = parse(&k, v)?,
            "step_size_jitter" => self.sampler.step_size_jitter = parse(&k, v)?,
            "band" => self.report.band = parse(&k, v)?,
            "event_window" => {
                self.report.event_window = match non_empty(v) {
                    Some(w) => Some(parse::<EventWindow>(&k, &w)?),
                    None => None,
                }
            }
            _ => return Err(Error::Config(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Apply every `key = value` line of a config file's text.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key = value, got {raw:?}", n + 1)))?;
            self.set(key, value).map_err(|e| Error::Config(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.sampler.validate()?;
        if !(self.report.band > 0.0 && self.report.band < 1.0) {
            return Err(Error::Config(format!("band must lie in (0, 1), got {}", self.report.band)));
        }
        Ok(())
    }
}
