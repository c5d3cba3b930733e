//! Single change-point segmented regression.
//!
//! Week `x` is predicted by `w1·x + b1` before the change point
//! `Γ = tau·(T − 1)` and by `w2·x + b2` from `Γ` on. With a positive
//! `sharpness` the switch is replaced by a logistic blend so the likelihood
//! is differentiable in `tau`.
//!
//! Sampling happens in an unconstrained space
//! `(w1, w2, b1, b2, logit(tau), logit(sigma / sigma_upper))`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hmc::LogDensity;

pub const NUM_PARAMS: usize = 6;
pub const PARAM_NAMES: [&str; NUM_PARAMS] = ["w1", "w2", "b1", "b2", "tau", "sigma"];

/// Smallest series the model accepts.
pub const MIN_SERIES_LEN: usize = 8;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangePointParams {
    pub w1: f64,
    pub w2: f64,
    pub b1: f64,
    pub b2: f64,
    /// Change-point location as a fraction of the observed span.
    pub tau: f64,
    pub sigma: f64,
}

impl ChangePointParams {
    pub fn to_array(&self) -> [f64; NUM_PARAMS] {
        [self.w1, self.w2, self.b1, self.b2, self.tau, self.sigma]
    }

    pub fn from_array(a: [f64; NUM_PARAMS]) -> Self {
        let [w1, w2, b1, b2, tau, sigma] = a;
        Self { w1, w2, b1, b2, tau, sigma }
    }

    /// Change point in week units for a series of length `len`.
    pub fn change_week(&self, len: usize) -> f64 {
        self.tau * (len.saturating_sub(1)) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub mu_w1: f64,
    pub sd_w1: f64,
    pub mu_w2: f64,
    pub sd_w2: f64,
    pub mu_b1: f64,
    pub sd_b1: f64,
    pub mu_b2: f64,
    pub sd_b2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma_upper: f64,
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sd_w1", self.sd_w1),
            ("sd_w2", self.sd_w2),
            ("sd_b1", self.sd_b1),
            ("sd_b2", self.sd_b2),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("sigma_upper", self.sigma_upper),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::PriorConfig(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("mu_w1", self.mu_w1), ("mu_w2", self.mu_w2), ("mu_b1", self.mu_b1), ("mu_b2", self.mu_b2)] {
            if !v.is_finite() {
                return Err(Error::PriorConfig(format!("{name} must be finite")));
            }
        }
        if self.alpha <= self.beta {
            return Err(Error::PriorConfig(format!(
                "alpha ({}) must exceed beta ({}) so the change-point prior leans late",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// Mean of the Beta prior on `tau`.
    pub fn tau_prior_mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodKind {
    #[default]
    Normal,
    Cauchy,
}

impl fmt::Display for LikelihoodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LikelihoodKind::Normal => "normal",
            LikelihoodKind::Cauchy => "cauchy",
        })
    }
}

impl FromStr for LikelihoodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(LikelihoodKind::Normal),
            "cauchy" => Ok(LikelihoodKind::Cauchy),
            other => Err(Error::PriorConfig(format!("unknown likelihood {other:?} (expected normal|cauchy)"))),
        }
    }
}

/// Upper bound `a` of the uniform noise prior.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SigmaUpper {
    /// [`default_sigma_upper`] of the fitted target.
    #[default]
    Auto,
    Value(f64),
}

impl SigmaUpper {
    pub fn resolve(self, y: &[f64]) -> f64 {
        match self {
            SigmaUpper::Auto => default_sigma_upper(y),
            SigmaUpper::Value(a) => a,
        }
    }
}

impl fmt::Display for SigmaUpper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaUpper::Auto => f.write_str("auto"),
            SigmaUpper::Value(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for SigmaUpper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(SigmaUpper::Auto);
        }
        match s.parse::<f64>() {
            Ok(a) if a.is_finite() && a > 0.0 => Ok(SigmaUpper::Value(a)),
            _ => Err(Error::PriorConfig(format!("sigma_upper must be \"auto\" or a positive number, got {s:?}"))),
        }
    }
}

impl Serialize for SigmaUpper {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SigmaUpper::Auto => serializer.serialize_str("auto"),
            SigmaUpper::Value(a) => serializer.serialize_f64(*a),
        }
    }
}

impl<'de> Deserialize<'de> for SigmaUpper {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(a) => Ok(SigmaUpper::Value(a)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Prior hyperparameters and likelihood settings chosen by the user; the
/// data-dependent parts of [`PriorSpec`] are filled in by [`ModelConfig::priors`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub alpha: f64,
    pub beta: f64,
    pub sigma_upper: SigmaUpper,
    pub slope_sd: f64,
    /// Logistic sharpness in 1/weeks; 0 is the hard switch.
    pub sharpness: f64,
    pub likelihood: LikelihoodKind,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            alpha: 4.0,
            beta: 2.0,
            sigma_upper: SigmaUpper::Auto,
            slope_sd: 0.1,
            sharpness: 20.0,
            likelihood: LikelihoodKind::Normal,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sharpness >= 0.0 && self.sharpness.is_finite()) {
            return Err(Error::PriorConfig(format!("sharpness must be >= 0, got {}", self.sharpness)));
        }
        Ok(())
    }

    pub fn priors(&self, y: &[f64]) -> Result<PriorSpec> {
        self.validate()?;
        derive_priors(y, self.alpha, self.beta, self.sigma_upper.resolve(y), self.slope_sd)
    }
}

/// Point in sampler coordinates, ordered
/// `(w1, w2, b1, b2, logit(tau), logit(sigma / sigma_upper))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnconstrainedPoint(pub [f64; NUM_PARAMS]);

pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Default upper bound of the uniform noise prior: twice the sample
/// standard deviation of the target, floored at 0.1 for flat series.
pub fn default_sigma_upper(y: &[f64]) -> f64 {
    if y.len() < 2 {
        return 0.1;
    }
    let m = mean(y);
    let var = y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
    (2.0 * var.sqrt()).max(0.1)
}

/// Data-driven priors: intercept means from the first and last quarter of
/// the series (time order), slope priors centred at zero.
pub fn derive_priors(y: &[f64], alpha: f64, beta: f64, sigma_upper: f64, slope_sd: f64) -> Result<PriorSpec> {
    if y.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort { len: y.len(), min: MIN_SERIES_LEN });
    }
    let quarter = y.len().div_ceil(4);
    let mu_b1 = mean(&y[..quarter]);
    let mu_b2 = mean(&y[y.len() - quarter..]);
    let priors = PriorSpec {
        mu_w1: 0.0,
        sd_w1: slope_sd,
        mu_w2: 0.0,
        sd_w2: slope_sd,
        mu_b1,
        sd_b1: 1.0,
        mu_b2,
        // mu_b2 / 4 collapses for near-empty late weeks
        sd_b2: (mu_b2 / 4.0).max(0.25),
        alpha,
        beta,
        sigma_upper,
    };
    priors.validate()?;
    Ok(priors)
}

/// Segment mixing weight for week `x`: 0 = first segment, 1 = second.
fn segment_weight(x: f64, change: f64, sharpness: f64) -> f64 {
    if sharpness > 0.0 {
        logistic(sharpness * (x - change))
    } else if x >= change {
        1.0
    } else {
        0.0
    }
}

/// Mean of the target at week `x` of a series of length `len`.
/// `sharpness == 0` selects the hard switch.
pub fn predict_mean(p: &ChangePointParams, x: f64, len: usize, sharpness: f64) -> f64 {
    let s = segment_weight(x, p.change_week(len), sharpness);
    let before = p.w1 * x + p.b1;
    let after = p.w2 * x + p.b2;
    if s == 0.0 {
        before
    } else if s == 1.0 {
        after
    } else {
        s * after + (1.0 - s) * before
    }
}

pub fn log_likelihood(p: &ChangePointParams, y: &[f64], kind: LikelihoodKind, sharpness: f64) -> f64 {
    let n = y.len();
    let sigma = p.sigma;
    let norm = match kind {
        LikelihoodKind::Normal => -0.5 * (LN_2PI + 2.0 * sigma.ln()),
        LikelihoodKind::Cauchy => -(PI * sigma).ln(),
    };
    y.iter()
        .enumerate()
        .map(|(i, &yi)| {
            let u = (yi - predict_mean(p, i as f64, n, sharpness)) / sigma;
            match kind {
                LikelihoodKind::Normal => norm - 0.5 * u * u,
                LikelihoodKind::Cauchy => norm - u.mul_add(u, 1.0).ln(),
            }
        })
        .sum()
}

fn normal_lpdf(v: f64, mu: f64, sd: f64) -> f64 {
    let u = (v - mu) / sd;
    -0.5 * (LN_2PI + 2.0 * sd.ln()) - 0.5 * u * u
}

fn ln_beta_fn(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Log prior density. Assumes `0 < tau < 1` and `0 < sigma < sigma_upper`.
pub fn log_prior(p: &ChangePointParams, priors: &PriorSpec) -> f64 {
    normal_lpdf(p.w1, priors.mu_w1, priors.sd_w1)
        + normal_lpdf(p.w2, priors.mu_w2, priors.sd_w2)
        + normal_lpdf(p.b1, priors.mu_b1, priors.sd_b1)
        + normal_lpdf(p.b2, priors.mu_b2, priors.sd_b2)
        + (priors.alpha - 1.0) * p.tau.ln()
        + (priors.beta - 1.0) * (1.0 - p.tau).ln()
        - ln_beta_fn(priors.alpha, priors.beta)
        - priors.sigma_upper.ln()
}

pub fn to_unconstrained(p: &ChangePointParams, priors: &PriorSpec) -> Result<UnconstrainedPoint> {
    if !(p.tau > 0.0 && p.tau < 1.0) {
        return Err(Error::Boundary(format!("tau = {} not in (0, 1)", p.tau)));
    }
    let frac = p.sigma / priors.sigma_upper;
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::Boundary(format!("sigma = {} not in (0, {})", p.sigma, priors.sigma_upper)));
    }
    Ok(UnconstrainedPoint([p.w1, p.w2, p.b1, p.b2, logit(p.tau), logit(frac)]))
}

pub fn to_constrained(z: &UnconstrainedPoint, priors: &PriorSpec) -> ChangePointParams {
    let [w1, w2, b1, b2, zt, zs] = z.0;
    ChangePointParams { w1, w2, b1, b2, tau: logistic(zt), sigma: priors.sigma_upper * logistic(zs) }
}

/// `ln |d(tau, sigma) / d(z_tau, z_sigma)|`.
pub fn log_jacobian(z: &UnconstrainedPoint, priors: &PriorSpec) -> f64 {
    let (zt, zs) = (z.0[4], z.0[5]);
    -softplus(-zt) - softplus(zt) + priors.sigma_upper.ln() - softplus(-zs) - softplus(zs)
}

/// Unnormalized log posterior in sampler coordinates (evidence omitted).
pub fn log_posterior_unconstrained(
    z: &UnconstrainedPoint,
    y: &[f64],
    priors: &PriorSpec,
    kind: LikelihoodKind,
    sharpness: f64,
) -> f64 {
    ChangePointPosterior::new(y, *priors, kind, sharpness).eval(&z.0, None)
}

/// Analytic gradient of [`log_posterior_unconstrained`]. In hard mode the
/// `z_tau` component carries only the prior and Jacobian terms.
pub fn grad_log_posterior(
    z: &UnconstrainedPoint,
    y: &[f64],
    priors: &PriorSpec,
    kind: LikelihoodKind,
    sharpness: f64,
) -> [f64; NUM_PARAMS] {
    let mut g = [0.0; NUM_PARAMS];
    ChangePointPosterior::new(y, *priors, kind, sharpness).eval(&z.0, Some(&mut g));
    g
}

/// The sampling target: posterior of the change-point model over one series.
#[derive(Debug, Clone)]
pub struct ChangePointPosterior<'a> {
    y: &'a [f64],
    priors: PriorSpec,
    kind: LikelihoodKind,
    sharpness: f64,
    likelihood_weight: f64,
    ln_beta: f64,
}

impl<'a> ChangePointPosterior<'a> {
    pub fn new(y: &'a [f64], priors: PriorSpec, kind: LikelihoodKind, sharpness: f64) -> Self {
        Self { y, priors, kind, sharpness, likelihood_weight: 1.0, ln_beta: ln_beta_fn(priors.alpha, priors.beta) }
    }

    /// Tempered target: the log likelihood is scaled by `weight` in `(0, 1]`.
    pub fn with_likelihood_weight(mut self, weight: f64) -> Self {
        self.likelihood_weight = weight;
        self
    }

    pub fn likelihood_weight(&self) -> f64 {
        self.likelihood_weight
    }

    pub fn priors(&self) -> &PriorSpec {
        &self.priors
    }

    pub fn kind(&self) -> LikelihoodKind {
        self.kind
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    pub fn observations(&self) -> &[f64] {
        self.y
    }

    fn eval(&self, z: &[f64], grad: Option<&mut [f64; NUM_PARAMS]>) -> f64 {
        let pr = &self.priors;
        let [w1, w2, b1, b2, zt, zs] = [z[0], z[1], z[2], z[3], z[4], z[5]];
        let tau = logistic(zt);
        let s_sigma = logistic(zs);
        let ln_tau = -softplus(-zt);
        let ln_1m_tau = -softplus(zt);
        let ln_s = -softplus(-zs);
        let ln_1m_s = -softplus(zs);
        let ln_sigma = pr.sigma_upper.ln() + ln_s;
        let sigma = pr.sigma_upper * s_sigma;
        let n = self.y.len();
        let span = n.saturating_sub(1) as f64;
        let change = tau * span;
        let k = self.sharpness;

        // d loglik / d(w1, w2, b1, b2, change), and sigma * d loglik / d sigma
        let mut g_lin = [0.0; 5];
        let mut g_log_sigma = 0.0;
        let mut ll = 0.0;
        let inv_sigma = 1.0 / sigma;
        for (i, &yi) in self.y.iter().enumerate() {
            let x = i as f64;
            let s = segment_weight(x, change, k);
            let before = w1 * x + b1;
            let after = w2 * x + b2;
            let mu = s * after + (1.0 - s) * before;
            let r = yi - mu;
            let u = r * inv_sigma;
            // d loglik_i / d mu
            let dmu = match self.kind {
                LikelihoodKind::Normal => {
                    ll -= 0.5 * u * u;
                    g_log_sigma += u * u - 1.0;
                    u * inv_sigma
                }
                LikelihoodKind::Cauchy => {
                    let q = u.mul_add(u, 1.0);
                    ll -= q.ln();
                    g_log_sigma += 2.0 * u * u / q - 1.0;
                    2.0 * u * inv_sigma / q
                }
            };
            g_lin[0] += dmu * (1.0 - s) * x;
            g_lin[1] += dmu * s * x;
            g_lin[2] += dmu * (1.0 - s);
            g_lin[3] += dmu * s;
            if k > 0.0 {
                g_lin[4] += dmu * (after - before) * (-k * s * (1.0 - s));
            }
        }
        ll += n as f64
            * match self.kind {
                LikelihoodKind::Normal => -0.5 * LN_2PI - ln_sigma,
                LikelihoodKind::Cauchy => -PI.ln() - ln_sigma,
            };
        let lw = self.likelihood_weight;
        if lw != 1.0 {
            ll *= lw;
            g_lin.iter_mut().for_each(|g| *g *= lw);
            g_log_sigma *= lw;
        }

        let lp = normal_lpdf(w1, pr.mu_w1, pr.sd_w1)
            + normal_lpdf(w2, pr.mu_w2, pr.sd_w2)
            + normal_lpdf(b1, pr.mu_b1, pr.sd_b1)
            + normal_lpdf(b2, pr.mu_b2, pr.sd_b2)
            + (pr.alpha - 1.0) * ln_tau
            + (pr.beta - 1.0) * ln_1m_tau
            - self.ln_beta
            - pr.sigma_upper.ln();
        let jac = ln_tau + ln_1m_tau + pr.sigma_upper.ln() + ln_s + ln_1m_s;

        if let Some(g) = grad {
            g[0] = g_lin[0] - (w1 - pr.mu_w1) / (pr.sd_w1 * pr.sd_w1);
            g[1] = g_lin[1] - (w2 - pr.mu_w2) / (pr.sd_w2 * pr.sd_w2);
            g[2] = g_lin[2] - (b1 - pr.mu_b1) / (pr.sd_b1 * pr.sd_b1);
            g[3] = g_lin[3] - (b2 - pr.mu_b2) / (pr.sd_b2 * pr.sd_b2);
            // Beta prior + logit Jacobian collapse to alpha(1 - tau) - beta tau
            g[4] = g_lin[4] * span * tau * (1.0 - tau) + pr.alpha * (1.0 - tau) - pr.beta * tau;
            // d sigma / d z_sigma = sigma (1 - s); Jacobian term adds 1 - 2s
            g[5] = g_log_sigma * (1.0 - s_sigma) + 1.0 - 2.0 * s_sigma;
        }
        ll + lp + jac
    }
}

impl LogDensity for ChangePointPosterior<'_> {
    fn dim(&self) -> usize {
        NUM_PARAMS
    }

    fn log_density_and_grad(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let mut g = [0.0; NUM_PARAMS];
        let v = self.eval(z, Some(&mut g));
        grad.copy_from_slice(&g);
        v
    }
}
