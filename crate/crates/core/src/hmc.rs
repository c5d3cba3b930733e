//! Hamiltonian Monte Carlo with a fixed number of leapfrog steps.
//!
//! Warmup tunes the step size by dual averaging toward `target_accept`.
//! With [`MetricKind::Dense`] it also estimates the posterior covariance
//! over expanding windows and uses it as the inverse mass matrix; with
//! [`MetricKind::Identity`] the mass matrix stays the identity.
//!
//! Each chain owns a `ChaCha8Rng` seeded with `seed + chain_index`, so the
//! output does not depend on how chains are scheduled.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{logistic, UnconstrainedPoint};
use crate::model::{to_unconstrained, ChangePointParams, ChangePointPosterior, LikelihoodKind, PriorSpec, NUM_PARAMS};

/// A differentiable log density over `R^dim`.
pub trait LogDensity {
    fn dim(&self) -> usize;

    /// Returns `log p(z)` and writes `∇ log p(z)` into `grad`.
    fn log_density_and_grad(&self, z: &[f64], grad: &mut [f64]) -> f64;
}

impl<T: LogDensity + ?Sized> LogDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn log_density_and_grad(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_density_and_grad(z, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Identity,
    #[default]
    Dense,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Identity => "identity",
            MetricKind::Dense => "dense",
        })
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" => Ok(MetricKind::Identity),
            "dense" => Ok(MetricKind::Dense),
            other => Err(Error::Config(format!("unknown metric {other:?} (expected identity|dense)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmcConfig {
    /// Post-warmup draws per chain.
    pub num_samples: usize,
    pub num_chains: usize,
    pub warmup_steps: usize,
    pub initial_step_size: f64,
    pub num_leapfrog_steps: usize,
    pub target_accept: f64,
    pub divergence_energy_threshold: f64,
    pub seed: u64,
    pub metric: MetricKind,
    /// Run chains on the rayon pool. Output is identical either way.
    #[serde(default = "default_parallel")]
    pub parallel: bool,
    /// Leading fraction of warmup during which the change-point sigmoid is
    /// sharpened geometrically from a blurred start up to the target. Zero
    /// disables annealing.
    #[serde(default = "default_anneal_fraction")]
    pub anneal_fraction: f64,
    /// Each transition uses `step · U(1 − j, 1]`. Breaks the resonance where
    /// a fixed-length trajectory nearly returns to its start; never exceeds
    /// the adapted step, so it adds no divergences.
    #[serde(default = "default_step_size_jitter")]
    pub step_size_jitter: f64,
}

fn default_parallel() -> bool {
    true
}

fn default_step_size_jitter() -> f64 {
    0.3
}

fn default_anneal_fraction() -> f64 {
    0.8
}

impl Default for HmcConfig {
    fn default() -> Self {
        Self {
            num_samples: 800,
            num_chains: 4,
            warmup_steps: 500,
            initial_step_size: 0.1,
            num_leapfrog_steps: 32,
            target_accept: 0.8,
            divergence_energy_threshold: 1000.0,
            seed: 0,
            metric: MetricKind::default(),
            parallel: true,
            anneal_fraction: default_anneal_fraction(),
            step_size_jitter: default_step_size_jitter(),
        }
    }
}

impl HmcConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.num_samples == 0 {
            return bad("num_samples must be positive".into());
        }
        if self.num_chains == 0 {
            return bad("num_chains must be positive".into());
        }
        if self.num_leapfrog_steps == 0 {
            return bad("num_leapfrog_steps must be positive".into());
        }
        if !(self.initial_step_size.is_finite() && self.initial_step_size > 0.0) {
            return bad(format!("initial_step_size must be positive, got {}", self.initial_step_size));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return bad(format!("target_accept must lie in (0, 1), got {}", self.target_accept));
        }
        if self.divergence_energy_threshold.is_nan() || self.divergence_energy_threshold <= 0.0 {
            return bad("divergence_energy_threshold must be positive".into());
        }
        if !(0.0..1.0).contains(&self.step_size_jitter) {
            return bad(format!("step_size_jitter must lie in [0, 1), got {}", self.step_size_jitter));
        }
        if !(0.0..1.0).contains(&self.anneal_fraction) {
            return bad(format!("anneal_fraction must lie in [0, 1), got {}", self.anneal_fraction));
        }
        Ok(())
    }
}

/// Inverse mass matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Identity,
    /// Covariance `Σ` (the inverse mass matrix) with its lower Cholesky factor.
    Dense {
        cov: DMatrix<f64>,
        chol: DMatrix<f64>,
    },
}

impl Metric {
    pub fn dense(cov: DMatrix<f64>) -> Option<Self> {
        let chol = cov.clone().cholesky()?.l();
        Some(Metric::Dense { cov, chol })
    }

    /// `M⁻¹ p`
    pub fn velocity(&self, p: &[f64], out: &mut [f64]) {
        match self {
            Metric::Identity => out.copy_from_slice(p),
            Metric::Dense { cov, .. } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..p.len()).map(|j| cov[(i, j)] * p[j]).sum();
                }
            }
        }
    }

    pub fn kinetic_energy(&self, p: &[f64]) -> f64 {
        match self {
            Metric::Identity => 0.5 * p.iter().map(|v| v * v).sum::<f64>(),
            Metric::Dense { .. } => {
                let mut v = vec![0.0; p.len()];
                self.velocity(p, &mut v);
                0.5 * p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
            }
        }
    }

    /// Draw `p ~ N(0, M)`.
    pub fn sample_momentum<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        if let Metric::Dense { chol, .. } = self {
            // solve Lᵀ p = ξ, so Cov(p) = (L Lᵀ)⁻¹
            let n = out.len();
            for i in (0..n).rev() {
                let mut acc = out[i];
                for j in i + 1..n {
                    acc -= chol[(j, i)] * out[j];
                }
                out[i] = acc / chol[(i, i)];
            }
        }
    }
}

/// Position, momentum and cached log density / gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    pub logp: f64,
    pub grad: Vec<f64>,
}

impl PhasePoint {
    pub fn new<T: LogDensity + ?Sized>(target: &T, z: Vec<f64>, p: Vec<f64>) -> Self {
        let mut grad = vec![0.0; z.len()];
        let logp = target.log_density_and_grad(&z, &mut grad);
        Self { z, p, logp, grad }
    }

    pub fn is_finite(&self) -> bool {
        self.logp.is_finite()
            && self.z.iter().all(|v| v.is_finite())
            && self.p.iter().all(|v| v.is_finite())
            && self.grad.iter().all(|v| v.is_finite())
    }

    pub fn hamiltonian(&self, metric: &Metric) -> f64 {
        -self.logp + metric.kinetic_energy(&self.p)
    }
}

/// One leapfrog step: half kick, drift, half kick. Returns `false` when the
/// new state is not finite (the caller treats that as a divergence).
pub fn leapfrog<T: LogDensity + ?Sized>(target: &T, metric: &Metric, state: &mut PhasePoint, step_size: f64) -> bool {
    let half = 0.5 * step_size;
    for (p, g) in state.p.iter_mut().zip(&state.grad) {
        *p += half * g;
    }
    let mut v = vec![0.0; state.p.len()];
    metric.velocity(&state.p, &mut v);
    for (z, v) in state.z.iter_mut().zip(&v) {
        *z += step_size * v;
    }
    state.logp = target.log_density_and_grad(&state.z, &mut state.grad);
    for (p, g) in state.p.iter_mut().zip(&state.grad) {
        *p += half * g;
    }
    state.is_finite()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub accepted: bool,
    pub diverged: bool,
    /// `min(1, exp(-ΔH))`; 0 for divergent proposals.
    pub accept_prob: f64,
    /// `H(proposal) − H(start)`; infinite when the trajectory blew up.
    pub energy_error: f64,
}

/// Metropolis acceptance probability for an energy error `ΔH`.
pub fn accept_probability(energy_error: f64) -> f64 {
    if energy_error.is_nan() {
        0.0
    } else {
        (-energy_error).exp().min(1.0)
    }
}

/// One HMC transition from `current` (whose momentum is overwritten).
/// On acceptance `current` becomes the proposal.
#[allow(clippy::too_many_arguments)]
pub fn hmc_transition<T: LogDensity + ?Sized, R: Rng + ?Sized>(
    target: &T,
    metric: &Metric,
    current: &mut PhasePoint,
    rng: &mut R,
    step_size: f64,
    num_steps: usize,
    divergence_threshold: f64,
) -> Transition {
    metric.sample_momentum(rng, &mut current.p);
    let h0 = current.hamiltonian(metric);
    let mut proposal = current.clone();
    let mut finite = true;
    for _ in 0..num_steps {
        if !leapfrog(target, metric, &mut proposal, step_size) {
            finite = false;
            break;
        }
    }
    let energy_error = if finite { proposal.hamiltonian(metric) - h0 } else { f64::INFINITY };
    let diverged = !energy_error.is_finite() || energy_error > divergence_threshold;
    let accept_prob = if diverged { 0.0 } else { accept_probability(energy_error) };
    let u: f64 = rng.random();
    let accepted = !diverged && u < accept_prob;
    if accepted {
        *current = proposal;
    }
    Transition { accepted, diverged, accept_prob, energy_error }
}

/// Nesterov dual averaging of `log(step_size)`.
#[derive(Debug, Clone)]
pub struct DualAveraging {
    target: f64,
    mu: f64,
    gamma: f64,
    t0: f64,
    kappa: f64,
    t: f64,
    h_bar: f64,
    log_step: f64,
    log_step_bar: f64,
}

impl DualAveraging {
    pub fn new(initial_step: f64, target: f64) -> Self {
        Self {
            target,
            mu: (10.0 * initial_step).ln(),
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
            t: 0.0,
            h_bar: 0.0,
            log_step: initial_step.ln(),
            log_step_bar: 0.0,
        }
    }

    /// Feed one acceptance statistic; returns the step size to use next.
    pub fn update(&mut self, accept_prob: f64) -> f64 {
        self.t += 1.0;
        let eta = 1.0 / (self.t + self.t0);
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept_prob);
        self.log_step = self.mu - self.t.sqrt() / self.gamma * self.h_bar;
        let w = self.t.powf(-self.kappa);
        self.log_step_bar = w * self.log_step + (1.0 - w) * self.log_step_bar;
        self.log_step.exp()
    }

    pub fn current(&self) -> f64 {
        self.log_step.exp()
    }

    /// Averaged step size, used once warmup ends.
    pub fn final_step(&self) -> f64 {
        if self.t == 0.0 {
            self.current()
        } else {
            self.log_step_bar.exp()
        }
    }
}

/// Step-size heuristic: double or halve until a one-step proposal's
/// acceptance crosses 1/2.
pub fn find_reasonable_step_size<T: LogDensity + ?Sized, R: Rng + ?Sized>(
    target: &T,
    metric: &Metric,
    start: &PhasePoint,
    initial: f64,
    rng: &mut R,
) -> f64 {
    let mut step = initial;
    let mut probe = start.clone();
    metric.sample_momentum(rng, &mut probe.p);
    let h0 = probe.hamiltonian(metric);
    let log_accept = |step: f64| {
        let mut s = probe.clone();
        if leapfrog(target, metric, &mut s, step) {
            h0 - s.hamiltonian(metric)
        } else {
            f64::NEG_INFINITY
        }
    };
    let half = 0.5f64.ln();
    let direction = if log_accept(step) > half { 1.0 } else { -1.0 };
    for _ in 0..100 {
        let la = log_accept(step);
        if (direction > 0.0 && la <= half) || (direction < 0.0 && la > half) {
            break;
        }
        step *= 2f64.powf(direction);
        if !(1e-12..=1e6).contains(&step) {
            break;
        }
    }
    step.clamp(1e-12, 1e6)
}

/// Warmup layout: a fast initial phase, expanding metric windows, and a
/// final fast phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarmupSchedule {
    /// Half-open warmup iteration ranges whose draws feed a metric estimate.
    pub windows: Vec<std::ops::Range<usize>>,
}

impl WarmupSchedule {
    pub fn new(warmup: usize, metric: MetricKind) -> Self {
        if metric == MetricKind::Identity || warmup < 20 {
            return Self { windows: Vec::new() };
        }
        let (mut init, mut term, mut base) = (75, 50, 25);
        if init + term + base > warmup {
            init = warmup * 15 / 100;
            term = warmup / 10;
            base = warmup - init - term;
        }
        let last = warmup - term;
        let mut windows = Vec::new();
        let mut start = init;
        let mut size = base;
        while start < last {
            let mut end = start + size;
            // fold a too-short remainder into this window
            if end + 2 * size > last {
                end = last;
            }
            windows.push(start..end);
            start = end;
            size *= 2;
        }
        Self { windows }
    }
}

/// Regularized sample covariance, shrunk toward `1e-3 · I`.
fn window_covariance(draws: &[Vec<f64>]) -> DMatrix<f64> {
    let n = draws.len();
    let d = draws[0].len();
    let mut mean = vec![0.0; d];
    for z in draws {
        for (m, v) in mean.iter_mut().zip(z) {
            *m += v / n as f64;
        }
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for z in draws {
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] += (z[i] - mean[i]) * (z[j] - mean[j]);
            }
        }
    }
    let nf = n as f64;
    cov /= (nf - 1.0).max(1.0);
    let shrink = nf / (nf + 5.0);
    cov *= shrink;
    for i in 0..d {
        // relative ridge: coordinates here differ in scale by orders of magnitude
        let v = cov[(i, i)];
        cov[(i, i)] += (1e-3 * v).max(1e-12) * 5.0 / (nf + 5.0);
    }
    cov
}

/// Output of one sampled chain on a generic target (unconstrained draws).
#[derive(Debug, Clone, PartialEq)]
pub struct RawChain {
    pub draws: Vec<Vec<f64>>,
    pub accepted: usize,
    pub num_divergences: usize,
    pub warmup_divergences: usize,
    pub final_step_size: f64,
    pub metric: Metric,
}

impl RawChain {
    pub fn accept_rate(&self) -> f64 {
        if self.draws.is_empty() {
            0.0
        } else {
            self.accepted as f64 / self.draws.len() as f64
        }
    }
}

/// Warmup then sample one chain from `init`.
pub fn sample_chain<T: LogDensity + ?Sized, R: Rng + ?Sized>(
    target: &T,
    init: Vec<f64>,
    config: &HmcConfig,
    rng: &mut R,
) -> RawChain {
    sample_chain_scheduled(|_| target, init, config, rng)
}

fn jittered<R: Rng + ?Sized>(step: f64, jitter: f64, rng: &mut R) -> f64 {
    if jitter > 0.0 {
        step * (1.0 - jitter * rng.random_range(0.0..1.0))
    } else {
        step
    }
}

/// As [`sample_chain`], but warmup iteration `it` targets `target_at(it)`.
/// Sampling targets `target_at(config.warmup_steps)`.
pub fn sample_chain_scheduled<T: LogDensity, F: Fn(usize) -> T, R: Rng + ?Sized>(
    target_at: F,
    init: Vec<f64>,
    config: &HmcConfig,
    rng: &mut R,
) -> RawChain {
    let mut target = target_at(0);
    let dim = target.dim();
    let mut metric = Metric::Identity;
    let mut current = PhasePoint::new(&target, init, vec![0.0; dim]);
    let schedule = WarmupSchedule::new(config.warmup_steps, config.metric);

    let mut step = config.initial_step_size;
    if config.warmup_steps > 0 && current.is_finite() {
        step = find_reasonable_step_size(&target, &metric, &current, step, rng);
    }
    let mut adapt = DualAveraging::new(step, config.target_accept);
    let mut window: Vec<Vec<f64>> = Vec::new();
    let mut next_window = 0;
    let mut warmup_divergences = 0;

    for it in 0..config.warmup_steps {
        if it > 0 {
            target = target_at(it);
            current = PhasePoint::new(&target, current.z.clone(), vec![0.0; dim]);
        }
        let eps = jittered(step, config.step_size_jitter, rng);
        let t = hmc_transition(
            &target,
            &metric,
            &mut current,
            rng,
            eps,
            config.num_leapfrog_steps,
            config.divergence_energy_threshold,
        );
        warmup_divergences += usize::from(t.diverged);
        step = adapt.update(t.accept_prob);

        if let Some(w) = schedule.windows.get(next_window) {
            if w.contains(&it) {
                window.push(current.z.clone());
            }
            if it + 1 == w.end {
                if window.len() > dim + 2 {
                    if let Some(m) = Metric::dense(window_covariance(&window)) {
                        metric = m;
                        current = PhasePoint::new(&target, current.z.clone(), vec![0.0; dim]);
                        step = find_reasonable_step_size(&target, &metric, &current, adapt.current(), rng);
                        adapt = DualAveraging::new(step, config.target_accept);
                    }
                }
                window.clear();
                next_window += 1;
            }
        }
    }
    if config.warmup_steps > 0 {
        step = adapt.final_step();
        target = target_at(config.warmup_steps);
        current = PhasePoint::new(&target, current.z.clone(), vec![0.0; dim]);
    }

    let mut draws = Vec::with_capacity(config.num_samples);
    let mut accepted = 0;
    let mut num_divergences = 0;
    for _ in 0..config.num_samples {
        let eps = jittered(step, config.step_size_jitter, rng);
        let t = hmc_transition(
            &target,
            &metric,
            &mut current,
            rng,
            eps,
            config.num_leapfrog_steps,
            config.divergence_energy_threshold,
        );
        accepted += usize::from(t.accepted);
        num_divergences += usize::from(t.diverged);
        draws.push(current.z.clone());
    }
    RawChain { draws, accepted, num_divergences, warmup_divergences, final_step_size: step, metric }
}

/// One chain of constrained-space draws, ordered `(w1, w2, b1, b2, tau, sigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub draws: Vec<[f64; NUM_PARAMS]>,
    pub accept_rate: f64,
    /// Post-warmup divergent transitions.
    pub num_divergences: usize,
    pub warmup_divergences: usize,
    pub final_step_size: f64,
}

/// Posterior draws without sampler statistics, one inner vector per chain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Draws {
    pub chains: Vec<Vec<[f64; NUM_PARAMS]>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DrawRow {
    chain: usize,
    iter: usize,
    w1: f64,
    w2: f64,
    b1: f64,
    b2: f64,
    tau: f64,
    sigma: f64,
}

impl Draws {
    pub fn num_draws(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_draws() == 0
    }

    /// Per-chain sequences of one parameter.
    pub fn param(&self, idx: usize) -> Vec<Vec<f64>> {
        self.chains.iter().map(|c| c.iter().map(|d| d[idx]).collect()).collect()
    }

    pub fn pooled(&self, idx: usize) -> Vec<f64> {
        self.chains.iter().flat_map(|c| c.iter().map(move |d| d[idx])).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = ChangePointParams> + '_ {
        self.chains.iter().flatten().map(|d| ChangePointParams::from_array(*d))
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (chain, draws) in self.chains.iter().enumerate() {
            for (iter, d) in draws.iter().enumerate() {
                let [w1, w2, b1, b2, tau, sigma] = *d;
                w.serialize(DrawRow { chain, iter, w1, w2, b1, b2, tau, sigma })?;
            }
        }
        w.flush().map_err(|e| Error::io("<draws>", e))?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(source: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(source);
        let mut chains: Vec<Vec<[f64; NUM_PARAMS]>> = Vec::new();
        for row in reader.deserialize::<DrawRow>() {
            let r = row.map_err(|e| Error::Schema(format!("draws csv: {e}")))?;
            if r.chain == chains.len() {
                chains.push(Vec::new());
            }
            if r.chain + 1 != chains.len() {
                return Err(Error::Schema(format!("draws csv: chain {} out of order", r.chain)));
            }
            let chain = &mut chains[r.chain];
            if r.iter != chain.len() {
                return Err(Error::Schema(format!("draws csv: chain {} iter {} out of order", r.chain, r.iter)));
            }
            chain.push([r.w1, r.w2, r.b1, r.b2, r.tau, r.sigma]);
        }
        Ok(Self { chains })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSet {
    pub chains: Vec<Chain>,
    pub config: HmcConfig,
}

impl ChainSet {
    pub fn draws(&self) -> Draws {
        Draws { chains: self.chains.iter().map(|c| c.draws.clone()).collect() }
    }

    pub fn total_divergences(&self) -> usize {
        self.chains.iter().map(|c| c.num_divergences).sum()
    }
}

/// Over-dispersed starting point drawn from the priors, with sigma uniform on
/// `[0.1 a, 0.9 a]`.
pub fn initial_point<R: Rng + ?Sized>(priors: &PriorSpec, rng: &mut R) -> UnconstrainedPoint {
    let normal = |mu: f64, sd: f64, rng: &mut R| Normal::new(mu, sd).expect("validated prior").sample(rng);
    let w1 = normal(priors.mu_w1, priors.sd_w1, rng);
    let w2 = normal(priors.mu_w2, priors.sd_w2, rng);
    let b1 = normal(priors.mu_b1, priors.sd_b1, rng);
    let b2 = normal(priors.mu_b2, priors.sd_b2, rng);
    let tau: f64 = Beta::new(priors.alpha, priors.beta).expect("validated prior").sample(rng);
    let tau = tau.clamp(1e-6, 1.0 - 1e-6);
    let sigma = priors.sigma_upper * rng.random_range(0.1..0.9);
    let p = ChangePointParams { w1, w2, b1, b2, tau, sigma };
    to_unconstrained(&p, priors).expect("initial point is interior")
}

fn constrain(z: &[f64], priors: &PriorSpec) -> [f64; NUM_PARAMS] {
    [z[0], z[1], z[2], z[3], logistic(z[4]), priors.sigma_upper * logistic(z[5])]
}

/// Warmup annealing of the change-point target. At full sharpness the
/// likelihood is nearly piecewise constant in the change point and has a
/// local mode where both segments coincide, so chains started from the
/// prior stall. Over the first `ramp` warmup iterations the likelihood
/// weight and the sigmoid sharpness both rise geometrically to their
/// targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub ramp: usize,
    pub weight_start: f64,
    pub sharpness_start: f64,
    pub sharpness_end: f64,
    pub sharpness: f64,
}

impl AnnealSchedule {
    /// Ramp endpoint used when the target is the hard switch.
    pub const HARD_RAMP_END: f64 = 20.0;
    pub const WEIGHT_START: f64 = 1e-3;

    pub fn new(sharpness: f64, len: usize, config: &HmcConfig) -> Self {
        let ramp = (config.anneal_fraction * config.warmup_steps as f64) as usize;
        let sharpness_end = if sharpness > 0.0 { sharpness } else { Self::HARD_RAMP_END };
        let sharpness_start = (10.0 / len.saturating_sub(1).max(1) as f64).min(sharpness_end);
        Self { ramp, weight_start: Self::WEIGHT_START, sharpness_start, sharpness_end, sharpness }
    }

    /// `(likelihood weight, sharpness)` at warmup iteration `it`.
    pub fn at(&self, it: usize) -> (f64, f64) {
        if it >= self.ramp {
            return (1.0, self.sharpness);
        }
        let f = it as f64 / self.ramp as f64;
        let geo = |a: f64, b: f64| a * (b / a).powf(f);
        (geo(self.weight_start, 1.0), geo(self.sharpness_start, self.sharpness_end))
    }
}

/// Sample the change-point posterior with `config.num_chains` independent chains.
pub fn run_chains(
    y: &[f64],
    priors: &PriorSpec,
    kind: LikelihoodKind,
    sharpness: f64,
    config: &HmcConfig,
) -> Result<ChainSet> {
    config.validate()?;
    priors.validate()?;
    let schedule = AnnealSchedule::new(sharpness, y.len(), config);
    let run_one = |chain: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(chain as u64));
        let init = initial_point(priors, &mut rng);
        let target_at = |it: usize| {
            let (weight, k) = schedule.at(it);
            ChangePointPosterior::new(y, *priors, kind, k).with_likelihood_weight(weight)
        };
        let raw = sample_chain_scheduled(target_at, init.0.to_vec(), config, &mut rng);
        Chain {
            accept_rate: raw.accept_rate(),
            draws: raw.draws.iter().map(|z| constrain(z, priors)).collect(),
            num_divergences: raw.num_divergences,
            warmup_divergences: raw.warmup_divergences,
            final_step_size: raw.final_step_size,
        }
    };
    let chains: Vec<Chain> = if config.parallel {
        (0..config.num_chains).into_par_iter().map(run_one).collect()
    } else {
        (0..config.num_chains).map(run_one).collect()
    };
    if chains.iter().all(|c| c.num_divergences == c.draws.len()) {
        return Err(Error::SamplingFailed {
            chains: chains.len(),
            divergences: chains.iter().map(|c| c.num_divergences).collect(),
        });
    }
    Ok(ChainSet { chains, config: config.clone() })
}
