//! Synthetic change-point series and a brute-force least-squares oracle.
//!
//! Noise comes from `ChaCha8Rng::seed_from_u64(seed)` through `rand_distr`
//! (ziggurat normal, inverse-CDF Cauchy). Both are pinned by `Cargo.lock`,
//! so a seed reproduces the same series on every platform.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::WeeklySeries;
use crate::model::{predict_mean, ChangePointParams, LikelihoodKind, MIN_SERIES_LEN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub w1: f64,
    pub w2: f64,
    pub b1: f64,
    pub b2: f64,
    pub tau_true: f64,
    pub sigma_true: f64,
    pub len: usize,
    pub noise_kind: LikelihoodKind,
    pub seed: u64,
    pub start_date: NaiveDate,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            w1: 0.004,
            w2: -0.006,
            b1: 0.5,
            b2: 4.5,
            tau_true: 0.75,
            sigma_true: 0.3,
            len: 400,
            noise_kind: LikelihoodKind::Normal,
            seed: 42,
            start_date: NaiveDate::from_ymd_opt(2013, 1, 7).expect("valid date"),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_true > 0.0 && self.tau_true < 1.0) {
            return Err(Error::Domain(format!("tau_true = {} not in (0, 1)", self.tau_true)));
        }
        if !(self.sigma_true >= 0.0 && self.sigma_true.is_finite()) {
            return Err(Error::Domain(format!("sigma_true = {} must be non-negative", self.sigma_true)));
        }
        if self.len < MIN_SERIES_LEN {
            return Err(Error::SeriesTooShort { len: self.len, min: MIN_SERIES_LEN });
        }
        Ok(())
    }

    pub fn params(&self) -> ChangePointParams {
        ChangePointParams {
            w1: self.w1,
            w2: self.w2,
            b1: self.b1,
            b2: self.b2,
            tau: self.tau_true,
            sigma: self.sigma_true,
        }
    }
}

/// Noise-free segment means with a hard switch at `tau_true · (T − 1)`.
pub fn segment_means(spec: &SynthSpec) -> Vec<f64> {
    let p = spec.params();
    (0..spec.len).map(|x| predict_mean(&p, x as f64, spec.len, 0.0)).collect()
}

/// Draw a synthetic series. The positive-sentiment target holds the
/// generated values directly; counts are back-filled as
/// `round(exp(target) − 1)` clamped at zero. `sigma_true = 0` gives the
/// exact segment means.
pub fn generate(spec: &SynthSpec) -> Result<WeeklySeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means = segment_means(spec);
    let target: Vec<f64> = if spec.sigma_true == 0.0 {
        means
    } else {
        match spec.noise_kind {
            LikelihoodKind::Normal => {
                let d = Normal::new(0.0, spec.sigma_true).expect("validated sigma");
                means.iter().map(|m| m + d.sample(&mut rng)).collect()
            }
            LikelihoodKind::Cauchy => {
                let d = Cauchy::new(0.0, spec.sigma_true).expect("validated sigma");
                means.iter().map(|m| m + d.sample(&mut rng)).collect()
            }
        }
    };
    Ok(series_from_target(spec.start_date, target))
}

/// Wrap a target vector as a series whose positive column carries it.
pub fn series_from_target(start_date: NaiveDate, target: Vec<f64>) -> WeeklySeries {
    let positive: Vec<u64> = target
        .iter()
        .map(|t| {
            let c = (t.exp() - 1.0).round();
            if c.is_finite() && c > 0.0 {
                c.min(u64::MAX as f64) as u64
            } else {
                0
            }
        })
        .collect();
    let zeros = vec![0u64; target.len()];
    let mut s = WeeklySeries::from_counts(start_date, positive, zeros.clone(), zeros).expect("equal lengths");
    s.target_positive = target;
    s
}

/// Shift `round(fraction · T)` distinct weeks of the positive target by
/// `±magnitude` (fair random sign). Returns the contaminated weeks in
/// ascending order; counts are back-filled from the new target.
pub fn inject_outliers(series: &mut WeeklySeries, fraction: f64, magnitude: f64, seed: u64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Domain(format!("outlier fraction {fraction} not in [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = (fraction * series.len() as f64).round() as usize;
    let mut weeks = rand::seq::index::sample(&mut rng, series.len(), count).into_vec();
    weeks.sort_unstable();
    let mut target = series.target_positive.clone();
    for &w in &weeks {
        target[w] += if rng.random_bool(0.5) { magnitude } else { -magnitude };
    }
    *series = series_from_target(series.start_date, target);
    Ok(weeks)
}

/// Ordinary least squares line over consecutive integer x values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub sse: f64,
}

/// OLS of `y[i]` on `x = offset + i`.
pub fn fit_line(y: &[f64], offset: usize) -> LineFit {
    let n = y.len() as f64;
    let xs = (0..y.len()).map(|i| (offset + i) as f64);
    let xbar = xs.clone().sum::<f64>() / n;
    let ybar = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, &yi) in xs.zip(y) {
        sxy += (x - xbar) * (yi - ybar);
        sxx += (x - xbar) * (x - xbar);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = ybar - slope * xbar;
    let sse = y
        .iter()
        .enumerate()
        .map(|(i, &yi)| {
            let r = yi - (slope * (offset + i) as f64 + intercept);
            r * r
        })
        .sum();
    LineFit { slope, intercept, sse }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFit {
    /// First week of the second segment.
    pub split: usize,
    pub tau_hat: f64,
    pub sse: f64,
    pub before: LineFit,
    pub after: LineFit,
}

/// Total SSE of independent OLS fits on `[0, k)` and `[k, T)`.
pub fn split_sse(y: &[f64], k: usize) -> (f64, LineFit, LineFit) {
    let before = fit_line(&y[..k], 0);
    let after = fit_line(&y[k..], k);
    (before.sse + after.sse, before, after)
}

/// Exhaustive two-segment least squares over splits `k ∈ [2, T − 2]`.
/// Ties (SSE within 1e-9 relative) go to the smaller split.
pub fn grid_mle(y: &[f64]) -> Result<GridFit> {
    if y.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort { len: y.len(), min: MIN_SERIES_LEN });
    }
    let t = y.len();
    let fits: Vec<(usize, f64, LineFit, LineFit)> = (2..=t - 2)
        .into_par_iter()
        .map(|k| {
            let (sse, a, b) = split_sse(y, k);
            (k, sse, a, b)
        })
        .collect();
    let scale = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
    let mut best = &fits[0];
    for f in &fits[1..] {
        if f.1 < best.1 - 1e-9 * scale {
            best = f;
        }
    }
    let (split, sse, before, after) = *best;
    Ok(GridFit { split, tau_hat: split as f64 / (t - 1) as f64, sse, before, after })
}
