//! Convergence diagnostics and the posterior summary table.

use std::fmt::{self, Write as _};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmc::{ChainSet, Draws};
use crate::model::PARAM_NAMES;

pub const DEFAULT_R_HAT_THRESHOLD: f64 = 1.1;

/// Column headings of the summary table, in order.
pub const TABLE_COLUMNS: [&str; 7] = ["mean", "std", "median", "5.0%", "95.0%", "n_eff", "r_hat"];

/// Linear-interpolation quantile of sorted data (R type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

fn check_equal_lengths(chains: &[Vec<f64>], min_len: usize) -> Result<usize> {
    let n = chains.first().map(Vec::len).ok_or_else(|| Error::Domain("no chains".into()))?;
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::Domain("chains have different lengths".into()));
    }
    if n < min_len {
        return Err(Error::Domain(format!("need at least {min_len} draws per chain, got {n}")));
    }
    Ok(n)
}

/// Split-half potential scale reduction factor.
///
/// Each chain is cut into two halves (the middle draw is dropped for odd
/// lengths) and the classic between/within variance ratio is computed over
/// the halves. A single chain is accepted since splitting yields two
/// sequences.
pub fn r_hat(chains: &[Vec<f64>]) -> Result<f64> {
    let len = check_equal_lengths(chains, 4)?;
    let n = len / 2;
    let halves: Vec<&[f64]> = chains.iter().flat_map(|c| [&c[..n], &c[len - n..]]).collect();
    let m = halves.len() as f64;
    let nf = n as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let grand = mean(&means);
    let between = nf / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let within = halves.iter().map(|h| sample_var(h)).sum::<f64>() / m;
    if within <= 0.0 || !within.is_finite() {
        return Ok(1.0);
    }
    let var_plus = (nf - 1.0) / nf * within + between / nf;
    Ok((var_plus / within).sqrt())
}

/// Biased autocovariance at `lag`.
fn autocov(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    (0..n - lag).map(|t| (x[t] - m) * (x[t + lag] - m)).sum::<f64>() / n as f64
}

/// Multi-chain effective sample size.
///
/// Autocorrelations are pooled across chains through the marginal variance
/// estimate and summed in consecutive pairs until a pair sum turns negative
/// (Geyer's initial positive sequence). Clamped to `(0, N]`.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Result<f64> {
    let n = check_equal_lengths(chains, 8)?;
    let m = chains.len();
    let total = (n * m) as f64;
    let nf = n as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let within = chains.iter().map(|c| sample_var(c)).sum::<f64>() / m as f64;
    if within <= 0.0 || !within.is_finite() {
        return Ok(total);
    }
    let between = if m > 1 {
        let grand = mean(&means);
        nf / (m as f64 - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>()
    } else {
        0.0
    };
    let var_plus = (nf - 1.0) / nf * within + between / nf;
    let rho = |lag: usize| {
        if lag == 0 {
            return 1.0;
        }
        let acov = chains.iter().zip(&means).map(|(c, &mu)| autocov(c, mu, lag)).sum::<f64>() / m as f64;
        1.0 - (within - acov) / var_plus
    };

    let mut sum_pairs = 0.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair < 0.0 {
            break;
        }
        sum_pairs += pair;
        lag += 2;
    }
    let tau = (-1.0 + 2.0 * sum_pairs).max(1.0 / total);
    Ok((total / tau).min(total))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
    pub n_eff: f64,
    pub r_hat: f64,
}

impl ParamSummary {
    pub fn from_chains(name: &str, chains: &[Vec<f64>]) -> Result<Self> {
        let pooled: Vec<f64> = chains.iter().flatten().copied().collect();
        if pooled.is_empty() {
            return Err(Error::EmptyPosterior);
        }
        let s = sorted(&pooled);
        let std = if pooled.len() > 1 { sample_var(&pooled).max(0.0).sqrt() } else { 0.0 };
        Ok(Self {
            name: name.to_string(),
            mean: mean(&pooled),
            std,
            median: quantile_sorted(&s, 0.5),
            q05: quantile_sorted(&s, 0.05),
            q95: quantile_sorted(&s, 0.95),
            n_eff: effective_sample_size(chains)?,
            r_hat: r_hat(chains)?,
        })
    }
}

/// Per-parameter summaries plus sampler health.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub params: Vec<ParamSummary>,
    pub total_divergences: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SummaryBody {
    mean: f64,
    std: f64,
    median: f64,
    q05: f64,
    q95: f64,
    n_eff: f64,
    r_hat: f64,
}

#[derive(Serialize, Deserialize)]
struct ReportWire {
    #[serde(flatten)]
    params: IndexMap<String, SummaryBody>,
    divergences: usize,
    converged: bool,
}

impl Serialize for DiagnosticsReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let params = self
            .params
            .iter()
            .map(|p| {
                let body = SummaryBody {
                    mean: p.mean,
                    std: p.std,
                    median: p.median,
                    q05: p.q05,
                    q95: p.q95,
                    n_eff: p.n_eff,
                    r_hat: p.r_hat,
                };
                (p.name.clone(), body)
            })
            .collect();
        ReportWire { params, divergences: self.total_divergences, converged: self.converged }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiagnosticsReport {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = ReportWire::deserialize(deserializer)?;
        Ok(Self {
            params: wire
                .params
                .into_iter()
                .map(|(name, b)| ParamSummary {
                    name,
                    mean: b.mean,
                    std: b.std,
                    median: b.median,
                    q05: b.q05,
                    q95: b.q95,
                    n_eff: b.n_eff,
                    r_hat: b.r_hat,
                })
                .collect(),
            total_divergences: wire.divergences,
            converged: wire.converged,
        })
    }
}

impl DiagnosticsReport {
    pub fn param(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Aligned plain-text table followed by the divergence count.
    pub fn table(&self, decimals: usize) -> String {
        let width =
            PARAM_NAMES.iter().map(|s| s.len()).chain(self.params.iter().map(|p| p.name.len())).max().unwrap_or(0);
        let col = (decimals + 6).max(8);
        let mut out = String::new();
        let _ = write!(out, "{:width$}", "");
        for h in TABLE_COLUMNS {
            let _ = write!(out, " {h:>col$}");
        }
        out.push('\n');
        for p in &self.params {
            let _ = write!(out, "{:>width$}", p.name);
            for v in [p.mean, p.std, p.median, p.q05, p.q95, p.n_eff, p.r_hat] {
                let _ = write!(out, " {v:>col$.decimals$}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "\nNumber of divergences: {}", self.total_divergences);
        out
    }
}

impl fmt::Display for DiagnosticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table(2))
    }
}

/// Summaries for every model parameter from raw draws.
pub fn summarize_draws(draws: &Draws, divergences: usize, r_hat_threshold: f64) -> Result<DiagnosticsReport> {
    if draws.is_empty() {
        return Err(Error::EmptyPosterior);
    }
    let params = PARAM_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| ParamSummary::from_chains(name, &draws.param(i)))
        .collect::<Result<Vec<_>>>()?;
    let converged = params.iter().all(|p| p.r_hat < r_hat_threshold);
    Ok(DiagnosticsReport { params, total_divergences: divergences, converged })
}

pub fn summarize(chain_set: &ChainSet, r_hat_threshold: f64) -> Result<DiagnosticsReport> {
    summarize_draws(&chain_set.draws(), chain_set.total_divergences(), r_hat_threshold)
}
