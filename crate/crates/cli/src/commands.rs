use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use cpd_core::diagnostics::{summarize, DiagnosticsReport, DEFAULT_R_HAT_THRESHOLD};
use cpd_core::hmc::{run_chains, Draws};
use cpd_core::ingest::{aggregate_weekly, parse_reviews, CategoryMap, WeeklySeries};
use cpd_core::output::write_all_atomic;
use cpd_core::report::{
    emit_result, estimate_changepoint, predictive_band, render_svgs, residuals_and_qq, week_grid, InputDescriptor,
    PlotInputs, ResultConfig, RunResult, PLOT_FILES,
};
use cpd_core::synth::{generate, SynthSpec};
use cpd_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::args::SynthCmd;
use crate::settings::Settings;

pub const MANIFEST: &str = "manifest.json";
pub const SERIES: &str = "series.csv";
pub const REJECTS: &str = "rejects.csv";
pub const DRAWS: &str = "draws.csv";
pub const DIAGNOSTICS: &str = "diagnostics.json";
pub const SUMMARY: &str = "summary.txt";
pub const RESULT: &str = "result.json";

/// Record of one invocation, written as `manifest.json` beside its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub config: Settings,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSpec>,
}

impl RunManifest {
    fn new(subcommand: &str, settings: &Settings, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            seed: settings.sampler.seed,
            config: settings.clone(),
            inputs,
            outputs,
            synth: None,
        }
    }

    fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s.into_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Whether the posterior passed the convergence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    NotConverged,
}

impl From<bool> for Outcome {
    fn from(converged: bool) -> Self {
        if converged {
            Outcome::Converged
        } else {
            Outcome::NotConverged
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.join(name),
        _ => PathBuf::from(name),
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

pub fn read_series(path: &Path) -> Result<WeeklySeries> {
    WeeklySeries::read_csv(open(path)?)
}

fn category_map(settings: &Settings) -> Result<CategoryMap> {
    match &settings.ingest.category_map {
        Some(p) => CategoryMap::parse(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
        None => Ok(CategoryMap::default()),
    }
}

/// Build the weekly series; returns it with the encoded series and rejects files.
fn ingest_files(input: &Path, settings: &Settings) -> Result<(WeeklySeries, Vec<u8>, Vec<u8>, usize)> {
    let map = category_map(settings)?;
    let parsed = parse_reviews(open(input)?, &settings.ingest.schema())?;
    let series =
        aggregate_weekly(&parsed.records, settings.ingest.category.as_deref(), settings.ingest.min_year, &map)?;
    let series_csv = csv_bytes(|b| series.write_csv(b))?;
    let rejects_csv = csv_bytes(|b| parsed.write_rejects(b))?;
    Ok((series, series_csv, rejects_csv, parsed.rejects.len()))
}

pub fn ingest(input: &Path, out: &Path, settings: &Settings) -> Result<()> {
    let (series, series_csv, rejects_csv, rejected) = ingest_files(input, settings)?;
    let rejects = sibling(out, REJECTS);
    let manifest_path = sibling(out, MANIFEST);
    let manifest = RunManifest::new("ingest", settings, vec![input.into()], vec![out.into(), rejects.clone()]);
    write_all_atomic(&[
        (out.to_path_buf(), series_csv),
        (rejects, rejects_csv),
        (manifest_path, manifest.to_bytes()?),
    ])?;
    eprintln!("{} weeks from {} to {}; {rejected} rows rejected", series.len(), series.start_date, series.end_date());
    Ok(())
}

pub fn synth(cmd: &SynthCmd, settings: &Settings) -> Result<()> {
    let spec = SynthSpec {
        w1: cmd.w1,
        w2: cmd.w2,
        b1: cmd.b1,
        b2: cmd.b2,
        tau_true: cmd.tau,
        sigma_true: cmd.sigma,
        len: cmd.len,
        noise_kind: cmd.noise,
        seed: cmd.seed,
        start_date: cmd.start_date,
    };
    let series = generate(&spec)?;
    let mut manifest = RunManifest::new("synth", settings, vec![], vec![cmd.out.clone()]);
    manifest.seed = spec.seed;
    manifest.synth = Some(spec);
    write_all_atomic(&[
        (cmd.out.clone(), csv_bytes(|b| series.write_csv(b))?),
        (sibling(&cmd.out, MANIFEST), manifest.to_bytes()?),
    ])
}

struct FitOutput {
    draws: Draws,
    diagnostics: DiagnosticsReport,
    files: Vec<(PathBuf, Vec<u8>)>,
}

fn fit_files(series: &WeeklySeries, out_dir: &Path, settings: &Settings) -> Result<FitOutput> {
    let y = series.target(settings.sentiment);
    let priors = settings.model.priors(y)?;
    let chains = run_chains(y, &priors, settings.model.likelihood, settings.model.sharpness, &settings.sampler)?;
    let diagnostics = summarize(&chains, DEFAULT_R_HAT_THRESHOLD)?;
    let draws = chains.draws();
    let table = diagnostics.table(2);
    print!("{table}");
    let files = vec![
        (out_dir.join(DRAWS), csv_bytes(|b| draws.write_csv(b))?),
        (out_dir.join(DIAGNOSTICS), {
            let mut s = serde_json::to_string_pretty(&diagnostics)?;
            s.push('\n');
            s.into_bytes()
        }),
        (out_dir.join(SUMMARY), table.into_bytes()),
    ];
    Ok(FitOutput { draws, diagnostics, files })
}

pub fn fit(series_path: &Path, out_dir: &Path, settings: &Settings) -> Result<Outcome> {
    let series = read_series(series_path)?;
    let mut out = fit_files(&series, out_dir, settings)?;
    let outputs = out.files.iter().map(|(p, _)| p.clone()).collect();
    let manifest = RunManifest::new("fit", settings, vec![series_path.into()], outputs);
    out.files.push((out_dir.join(MANIFEST), manifest.to_bytes()?));
    write_all_atomic(&out.files)?;
    Ok(out.diagnostics.converged.into())
}

fn report_files(
    series: &WeeklySeries,
    source: &Path,
    draws: &Draws,
    diagnostics: DiagnosticsReport,
    out_dir: &Path,
    settings: &Settings,
) -> Result<Vec<(PathBuf, Vec<u8>)>> {
    let model = &settings.model;
    let y = series.target(settings.sentiment);
    let window = settings.report.event_window;
    let estimate = estimate_changepoint(draws, series, window.as_ref())?;
    let band = predictive_band(
        draws,
        y.len(),
        model.likelihood,
        model.sharpness,
        &week_grid(y.len()),
        true,
        settings.report.band,
        settings.sampler.seed,
    )?;
    let residuals = residuals_and_qq(draws, y, model.sharpness)?;
    let title = match &settings.ingest.category {
        Some(c) => format!("{c} ({})", settings.sentiment),
        None => format!("all categories ({})", settings.sentiment),
    };
    let svgs =
        render_svgs(&PlotInputs { title: &title, y, draws, band: &band, estimate: &estimate, residuals: &residuals })?;
    let result = RunResult::new(
        InputDescriptor::new(
            source.display().to_string(),
            settings.ingest.category.clone(),
            settings.sentiment,
            series,
        ),
        ResultConfig {
            model: *model,
            priors: model.priors(y)?,
            sampler: settings.sampler.clone(),
            band: settings.report.band,
            event_window: window,
        },
        diagnostics,
        estimate,
        band,
        residuals.summary(),
    );
    let mut files = vec![(out_dir.join(RESULT), emit_result(&result)?.into_bytes())];
    files.extend(PLOT_FILES.iter().zip(svgs).map(|(name, doc)| (out_dir.join(name), doc.into_bytes())));
    Ok(files)
}

/// Settings recorded by the fit in `fit_dir`, with report options taken from `overrides`.
pub fn fit_settings(fit_dir: &Path, overrides: &Settings) -> Result<Settings> {
    let mut settings = RunManifest::read(&fit_dir.join(MANIFEST))?.config;
    settings.report = overrides.report.clone();
    Ok(settings)
}

pub fn report(series_path: &Path, fit_dir: &Path, out_dir: &Path, settings: &Settings) -> Result<Outcome> {
    let series = read_series(series_path)?;
    let draws = Draws::read_csv(open(&fit_dir.join(DRAWS))?)?;
    let diagnostics: DiagnosticsReport = {
        let p = fit_dir.join(DIAGNOSTICS);
        serde_json::from_str(&std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?)?
    };
    let converged = diagnostics.converged;
    let mut files = report_files(&series, series_path, &draws, diagnostics, out_dir, settings)?;
    let outputs = files.iter().map(|(p, _)| p.clone()).collect();
    let inputs = vec![series_path.into(), fit_dir.join(DRAWS), fit_dir.join(DIAGNOSTICS)];
    let manifest = RunManifest::new("report", settings, inputs, outputs);
    files.push((out_dir.join(MANIFEST), manifest.to_bytes()?));
    write_all_atomic(&files)?;
    Ok(converged.into())
}

pub fn run_all(input: &Path, out_dir: &Path, settings: &Settings) -> Result<Outcome> {
    let (series, series_csv, rejects_csv, rejected) = ingest_files(input, settings)?;
    eprintln!("{} weeks from {} to {}; {rejected} rows rejected", series.len(), series.start_date, series.end_date());
    let series_path = out_dir.join(SERIES);
    let fit = fit_files(&series, out_dir, settings)?;
    let converged = fit.diagnostics.converged;
    let mut files = vec![(series_path.clone(), series_csv), (out_dir.join(REJECTS), rejects_csv)];
    files.extend(report_files(&series, &series_path, &fit.draws, fit.diagnostics, out_dir, settings)?);
    files.extend(fit.files);
    let outputs = files.iter().map(|(p, _)| p.clone()).collect();
    let manifest = RunManifest::new("run", settings, vec![input.into()], outputs);
    files.push((out_dir.join(MANIFEST), manifest.to_bytes()?));
    write_all_atomic(&files)?;
    Ok(converged.into())
}
