//! Posterior summaries for decisions and figures: the change-point date with
//! its credible interval, the posterior predictive band, residuals with QQ
//! pairs, four SVG plots, and the versioned JSON result.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use crate::diagnostics::{quantile_sorted, sorted, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::hmc::{Draws, HmcConfig};
use crate::ingest::{Target, WeeklySeries};
use crate::model::{predict_mean, ChangePointParams, LikelihoodKind, ModelConfig, PriorSpec, NUM_PARAMS, PARAM_NAMES};
use crate::output::write_all_atomic;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BAND: f64 = 0.90;
pub const PLOT_FILES: [&str; 4] = ["lineplot.svg", "posterior.svg", "residuals.svg", "qq.svg"];

const TAU: usize = 4;

/// Inclusive calendar window, written `YYYY-MM-DD:YYYY-MM-DD`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl EventWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!("event window starts ({start}) after it ends ({end})")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

impl FromStr for EventWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("event window {s:?} is not YYYY-MM-DD:YYYY-MM-DD"));
        let (a, b) = s.trim().split_once(':').ok_or_else(bad)?;
        let parse = |t: &str| NaiveDate::parse_from_str(t.trim(), "%Y-%m-%d").map_err(|_| bad());
        Self::new(parse(a)?, parse(b)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointEstimate {
    pub tau_mean: f64,
    pub tau_median: f64,
    pub tau_q05: f64,
    pub tau_q95: f64,
    pub week_index: usize,
    pub week_q05: usize,
    pub week_q95: usize,
    pub calendar_date: NaiveDate,
    pub date_q05: NaiveDate,
    pub date_q95: NaiveDate,
    pub in_window: bool,
}

fn nonempty(draws: &Draws) -> Result<()> {
    if draws.is_empty() {
        Err(Error::EmptyPosterior)
    } else {
        Ok(())
    }
}

fn to_week(tau: f64, len: usize) -> usize {
    let span = len.saturating_sub(1);
    ((tau * span as f64).round().max(0.0) as usize).min(span)
}

/// Point estimate is the posterior mean of `tau`; the interval weeks are
/// widened if needed so they bracket the point week.
pub fn estimate_changepoint(
    draws: &Draws,
    series: &WeeklySeries,
    window: Option<&EventWindow>,
) -> Result<ChangePointEstimate> {
    nonempty(draws)?;
    let taus = sorted(&draws.pooled(TAU));
    let tau_mean = taus.iter().sum::<f64>() / taus.len() as f64;
    let tau_q05 = quantile_sorted(&taus, 0.05);
    let tau_q95 = quantile_sorted(&taus, 0.95);
    let len = series.len();
    let week_index = to_week(tau_mean, len);
    let week_q05 = to_week(tau_q05, len).min(week_index);
    let week_q95 = to_week(tau_q95, len).max(week_index);
    let calendar_date = series.week_start(week_index);
    Ok(ChangePointEstimate {
        tau_mean,
        tau_median: quantile_sorted(&taus, 0.5),
        tau_q05,
        tau_q95,
        week_index,
        week_q05,
        week_q95,
        calendar_date,
        date_q05: series.week_start(week_q05),
        date_q95: series.week_start(week_q95),
        in_window: window.is_some_and(|w| w.contains(calendar_date)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveBand {
    pub level: f64,
    pub x: Vec<f64>,
    pub median: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Integer week grid `0..len`.
pub fn week_grid(len: usize) -> Vec<f64> {
    (0..len).map(|x| x as f64).collect()
}

/// Pointwise quantiles of `μ(x)` (plus one likelihood draw per posterior
/// draw when `noise` is set) across all pooled draws.
#[allow(clippy::too_many_arguments)]
pub fn predictive_band(
    draws: &Draws,
    len: usize,
    kind: LikelihoodKind,
    sharpness: f64,
    grid: &[f64],
    noise: bool,
    band: f64,
    seed: u64,
) -> Result<PredictiveBand> {
    nonempty(draws)?;
    if !(band > 0.0 && band < 1.0) {
        return Err(Error::Domain(format!("band level must lie in (0, 1), got {band}")));
    }
    let span = len.saturating_sub(1) as f64;
    if let Some(x) = grid.iter().find(|&&x| !(0.0..=span).contains(&x)) {
        return Err(Error::Domain(format!("grid point {x} outside [0, {span}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(draws.num_draws()); grid.len()];
    for p in draws.iter() {
        for (col, &x) in columns.iter_mut().zip(grid) {
            let mut v = predict_mean(&p, x, len, sharpness);
            if noise {
                v += match kind {
                    LikelihoodKind::Normal => Normal::new(0.0, p.sigma).expect("sigma > 0").sample(&mut rng),
                    LikelihoodKind::Cauchy => Cauchy::new(0.0, p.sigma).expect("sigma > 0").sample(&mut rng),
                };
            }
            col.push(v);
        }
    }
    let tail = (1.0 - band) / 2.0;
    let mut out = PredictiveBand {
        level: band,
        x: grid.to_vec(),
        median: Vec::with_capacity(grid.len()),
        lo: Vec::with_capacity(grid.len()),
        hi: Vec::with_capacity(grid.len()),
    };
    for col in &mut columns {
        col.sort_by(f64::total_cmp);
        out.lo.push(quantile_sorted(col, tail));
        out.median.push(quantile_sorted(col, 0.5));
        out.hi.push(quantile_sorted(col, 1.0 - tail));
    }
    Ok(out)
}

/// Component-wise posterior mean.
pub fn posterior_mean(draws: &Draws) -> Result<ChangePointParams> {
    nonempty(draws)?;
    let mut acc = [0.0; NUM_PARAMS];
    for chain in &draws.chains {
        for d in chain {
            for (a, v) in acc.iter_mut().zip(d) {
                *a += v;
            }
        }
    }
    let n = draws.num_draws() as f64;
    Ok(ChangePointParams::from_array(acc.map(|a| a / n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub theoretical: f64,
    pub sample: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sorted standardized residuals against normal quantiles at `(i − 0.5)/n`.
    pub qq: Vec<QqPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Residuals {
    pub fn summary(&self) -> ResidualSummary {
        let (mean, std) = mean_std(&self.residuals);
        ResidualSummary {
            n: self.residuals.len(),
            mean,
            std,
            min: self.residuals.iter().copied().fold(f64::INFINITY, f64::min),
            max: self.residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

/// Residuals against the regression line at the posterior-mean parameters.
pub fn residuals_and_qq(draws: &Draws, y: &[f64], sharpness: f64) -> Result<Residuals> {
    if y.is_empty() {
        return Err(Error::Domain("residuals need a non-empty series".into()));
    }
    let p = posterior_mean(draws)?;
    let fitted: Vec<f64> = (0..y.len()).map(|x| predict_mean(&p, x as f64, y.len(), sharpness)).collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let (m, s) = mean_std(&residuals);
    let z = StdNormal::standard();
    let n = residuals.len() as f64;
    let qq = sorted(&residuals)
        .into_iter()
        .enumerate()
        .map(|(i, r)| QqPoint {
            theoretical: z.inverse_cdf((i as f64 + 0.5) / n),
            sample: if s > 0.0 { (r - m) / s } else { 0.0 },
        })
        .collect();
    Ok(Residuals { fitted, residuals, qq })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub source: String,
    pub category: Option<String>,
    pub sentiment: Target,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub weeks: usize,
}

impl InputDescriptor {
    pub fn new(source: impl Into<String>, category: Option<String>, sentiment: Target, series: &WeeklySeries) -> Self {
        Self {
            source: source.into(),
            category,
            sentiment,
            start_date: series.start_date,
            end_date: series.end_date(),
            weeks: series.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultConfig {
    pub model: ModelConfig,
    pub priors: PriorSpec,
    pub sampler: HmcConfig,
    pub band: f64,
    pub event_window: Option<EventWindow>,
}

/// Everything a run produced, as serialized to `result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    pub input: InputDescriptor,
    pub config: ResultConfig,
    pub diagnostics: DiagnosticsReport,
    pub converged: bool,
    pub changepoint: ChangePointEstimate,
    pub band: PredictiveBand,
    pub residuals: ResidualSummary,
}

impl RunResult {
    pub fn new(
        input: InputDescriptor,
        config: ResultConfig,
        diagnostics: DiagnosticsReport,
        changepoint: ChangePointEstimate,
        band: PredictiveBand,
        residuals: ResidualSummary,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            input,
            config,
            converged: diagnostics.converged,
            diagnostics,
            changepoint,
            band,
            residuals,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn emit_result(result: &RunResult) -> Result<String> {
    let mut s = serde_json::to_string_pretty(result)?;
    s.push('\n');
    Ok(s)
}

/// Inputs shared by the four plots.
#[derive(Debug, Clone, Copy)]
pub struct PlotInputs<'a> {
    pub title: &'a str,
    pub y: &'a [f64],
    pub draws: &'a Draws,
    pub band: &'a PredictiveBand,
    pub estimate: &'a ChangePointEstimate,
    pub residuals: &'a Residuals,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 44.0;

/// Affine map from data coordinates into a plotting rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let d = lo.abs().max(1.0) * 0.5;
        return (lo - d, hi + d);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn extent<'a>(values: impl IntoIterator<Item = &'a f64>) -> (f64, f64) {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

impl Frame {
    /// The main panel of a single-plot document.
    pub fn main(x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Self {
            x_range,
            y_range,
            left: MARGIN_LEFT,
            top: MARGIN_TOP,
            width: WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            height: HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
        }
    }

    /// Frame used by the line plot of a series of `len` weeks.
    pub fn for_lineplot(len: usize, y: &[f64], band: &PredictiveBand) -> Self {
        let x_range = if len > 1 { (0.0, (len - 1) as f64) } else { (-0.5, 0.5) };
        let (lo, hi) = extent(y.iter().chain(&band.lo).chain(&band.hi));
        Self::main(x_range, padded(lo, hi))
    }

    pub fn px(&self, x: f64) -> f64 {
        let (a, b) = self.x_range;
        self.left + (x - a) / (b - a) * self.width
    }

    pub fn py(&self, y: f64) -> f64 {
        let (a, b) = self.y_range;
        self.top + (1.0 - (y - a) / (b - a)) * self.height
    }

    fn bottom(&self) -> f64 {
        self.top + self.height
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

struct Svg(String);

impl Svg {
    fn new(title: &str) -> Self {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
            w = WIDTH,
            h = HEIGHT
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Svg(s)
    }

    fn raw(&mut self, line: &str) {
        self.0.push_str(line);
        self.0.push('\n');
    }

    fn axes(&mut self, f: &Frame, x_label: &str, y_label: &str) {
        let _ = writeln!(
            self.0,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            num(f.left),
            num(f.top),
            num(f.width),
            num(f.height)
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = f.x_range.0 + t * (f.x_range.1 - f.x_range.0);
            let yv = f.y_range.0 + t * (f.y_range.1 - f.y_range.0);
            let (x, y) = (f.px(xv), f.py(yv));
            let _ = writeln!(
                self.0,
                r#"<line x1="{x}" y1="{b}" x2="{x}" y2="{b5}" stroke="black"/><text x="{x}" y="{bt}" text-anchor="middle">{l}</text>"#,
                x = num(x),
                b = num(f.bottom()),
                b5 = num(f.bottom() + 5.0),
                bt = num(f.bottom() + 17.0),
                l = tick_label(xv)
            );
            let _ = writeln!(
                self.0,
                r#"<line x1="{l5}" y1="{y}" x2="{l}" y2="{y}" stroke="black"/><text x="{lt}" y="{yt}" text-anchor="end">{v}</text>"#,
                l5 = num(f.left - 5.0),
                l = num(f.left),
                lt = num(f.left - 7.0),
                y = num(y),
                yt = num(y + 4.0),
                v = tick_label(yv)
            );
        }
        let _ = writeln!(
            self.0,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num(f.left + f.width / 2.0),
            num(f.bottom() + 34.0),
            escape(x_label)
        );
        let _ = writeln!(
            self.0,
            r#"<text x="14" y="{y}" text-anchor="middle" transform="rotate(-90 14 {y})">{}</text>"#,
            escape(y_label),
            y = num(f.top + f.height / 2.0)
        );
    }

    fn polyline(&mut self, f: &Frame, xs: &[f64], ys: &[f64], attrs: &str) {
        let pts: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{},{}", num(f.px(x)), num(f.py(y)))).collect();
        let _ = writeln!(self.0, r#"<polyline points="{}" fill="none" {attrs}/>"#, pts.join(" "));
    }

    fn points(&mut self, f: &Frame, xs: &[f64], ys: &[f64], attrs: &str) {
        let _ = writeln!(self.0, "<g {attrs}>");
        for (&x, &y) in xs.iter().zip(ys) {
            let _ = writeln!(self.0, r#"<circle cx="{}" cy="{}" r="2"/>"#, num(f.px(x)), num(f.py(y)));
        }
        self.0.push_str("</g>\n");
    }

    fn finish(mut self) -> String {
        self.0.push_str("</svg>\n");
        self.0
    }
}

fn lineplot_svg(inp: &PlotInputs<'_>) -> String {
    let len = inp.y.len();
    let f = Frame::for_lineplot(len, inp.y, inp.band);
    let est = inp.estimate;
    let mut s = Svg::new(inp.title);
    let (q05, q95) = (f.px(est.week_q05 as f64), f.px(est.week_q95 as f64));
    let _ = writeln!(
        s.0,
        r##"<rect id="changepoint-ci" x="{}" y="{}" width="{}" height="{}" fill="#f4a6c6" fill-opacity="0.45"/>"##,
        num(q05),
        num(f.top),
        num((q95 - q05).max(1.0)),
        num(f.height)
    );
    let b = inp.band;
    let upper: Vec<String> =
        b.x.iter().zip(&b.hi).map(|(&x, &y)| format!("{},{}", num(f.px(x)), num(f.py(y)))).collect();
    let lower: Vec<String> =
        b.x.iter().zip(&b.lo).rev().map(|(&x, &y)| format!("{},{}", num(f.px(x)), num(f.py(y)))).collect();
    let _ = writeln!(
        s.0,
        r##"<polygon id="band" points="{} {}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>"##,
        upper.join(" "),
        lower.join(" ")
    );
    s.points(&f, &week_grid(len), inp.y, r##"id="observed" fill="#555555""##);
    s.polyline(&f, &week_grid(len), &inp.residuals.fitted, r##"id="regression" stroke="#2ca02c" stroke-width="2""##);
    let x = num(f.px(est.week_index as f64));
    let _ = writeln!(
        s.0,
        r##"<line id="changepoint" data-week="{w}" x1="{x}" y1="{t}" x2="{x}" y2="{b}" stroke="#d6277a" stroke-width="2"/>"##,
        w = est.week_index,
        t = num(f.top),
        b = num(f.bottom())
    );
    let _ = writeln!(
        s.0,
        r##"<text x="{}" y="{}" fill="#d6277a">{}</text>"##,
        num(f.px(est.week_index as f64) + 4.0),
        num(f.top + 14.0),
        est.calendar_date
    );
    s.axes(&f, "week", "log(1 + reviews)");
    s.finish()
}

const HIST_BINS: usize = 30;

fn posterior_svg(inp: &PlotInputs<'_>) -> String {
    let mut s = Svg::new(&format!("{}: posterior", inp.title));
    let (cols, rows) = (3usize, 2usize);
    let cell_w = (WIDTH - 20.0) / cols as f64;
    let cell_h = (HEIGHT - MARGIN_TOP - 10.0) / rows as f64;
    for (k, name) in PARAM_NAMES.iter().enumerate() {
        let values = inp.draws.pooled(k);
        let (lo, hi) = padded(extent(&values).0, extent(&values).1);
        let width = (hi - lo) / HIST_BINS as f64;
        let mut counts = [0usize; HIST_BINS];
        for v in &values {
            let i = (((v - lo) / width).floor().max(0.0) as usize).min(HIST_BINS - 1);
            counts[i] += 1;
        }
        let peak = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
        let (c, r) = (k % cols, k / cols);
        let f = Frame {
            x_range: (lo, hi),
            y_range: (0.0, peak * 1.05),
            left: 10.0 + c as f64 * cell_w + 16.0,
            top: MARGIN_TOP + r as f64 * cell_h + 18.0,
            width: cell_w - 32.0,
            height: cell_h - 46.0,
        };
        let _ = writeln!(s.0, r#"<g id="hist-{name}">"#);
        for (i, &n) in counts.iter().enumerate() {
            let x0 = f.px(lo + i as f64 * width);
            let x1 = f.px(lo + (i + 1) as f64 * width);
            let y = f.py(n as f64);
            let _ = writeln!(
                s.0,
                r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#6baed6" stroke="white" stroke-width="0.5"/>"##,
                num(x0),
                num(y),
                num(x1 - x0),
                num(f.bottom() - y)
            );
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let mx = num(f.px(mean));
        let _ = writeln!(
            s.0,
            r##"<line x1="{mx}" y1="{}" x2="{mx}" y2="{}" stroke="#d62728"/>"##,
            num(f.top),
            num(f.bottom())
        );
        let _ = writeln!(
            s.0,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            num(f.left),
            num(f.top),
            num(f.width),
            num(f.height)
        );
        let _ = writeln!(
            s.0,
            r#"<text x="{}" y="{}" text-anchor="middle">{name} (mean {})</text>"#,
            num(f.left + f.width / 2.0),
            num(f.top - 5.0),
            tick_label(mean)
        );
        for (x, anchor) in [(lo, "start"), (hi, "end")] {
            let _ = writeln!(
                s.0,
                r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#,
                num(f.px(x)),
                num(f.bottom() + 13.0),
                tick_label(x)
            );
        }
        s.raw("</g>");
    }
    s.finish()
}

fn residuals_svg(inp: &PlotInputs<'_>) -> String {
    let r = &inp.residuals.residuals;
    let xs = week_grid(r.len());
    let (lo, hi) = extent(r.iter().chain(&[0.0]));
    let x_range = if r.len() > 1 { (0.0, (r.len() - 1) as f64) } else { (-0.5, 0.5) };
    let f = Frame::main(x_range, padded(lo, hi));
    let mut s = Svg::new(&format!("{}: residuals", inp.title));
    let _ = writeln!(
        s.0,
        r##"<line id="zero" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#d62728"/>"##,
        num(f.left),
        num(f.left + f.width),
        y = num(f.py(0.0))
    );
    s.points(&f, &xs, r, r##"fill="#3182bd""##);
    s.axes(&f, "week", "residual");
    s.finish()
}

fn qq_svg(inp: &PlotInputs<'_>) -> String {
    let qq = &inp.residuals.qq;
    let tx: Vec<f64> = qq.iter().map(|q| q.theoretical).collect();
    let sy: Vec<f64> = qq.iter().map(|q| q.sample).collect();
    let (lo, hi) = extent(tx.iter().chain(&sy));
    let range = padded(lo, hi);
    let f = Frame::main(range, range);
    let mut s = Svg::new(&format!("{}: normal QQ", inp.title));
    let _ = writeln!(
        s.0,
        r##"<line id="identity" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#d62728"/>"##,
        num(f.px(range.0)),
        num(f.py(range.0)),
        num(f.px(range.1)),
        num(f.py(range.1))
    );
    s.points(&f, &tx, &sy, r##"fill="#3182bd""##);
    s.axes(&f, "theoretical quantile", "standardized residual");
    s.finish()
}

/// The four plot documents, in [`PLOT_FILES`] order.
pub fn render_svgs(inputs: &PlotInputs<'_>) -> Result<[String; 4]> {
    nonempty(inputs.draws)?;
    if inputs.y.is_empty() {
        return Err(Error::Domain("cannot plot an empty series".into()));
    }
    Ok([lineplot_svg(inputs), posterior_svg(inputs), residuals_svg(inputs), qq_svg(inputs)])
}

/// Write the four plots into `out_dir`; nothing is written on error.
pub fn render_plots(out_dir: &Path, inputs: &PlotInputs<'_>) -> Result<Vec<PathBuf>> {
    let docs = render_svgs(inputs)?;
    let files: Vec<(PathBuf, Vec<u8>)> =
        PLOT_FILES.iter().zip(docs).map(|(name, doc)| (out_dir.join(name), doc.into_bytes())).collect();
    write_all_atomic(&files)?;
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
