//! Weighted bootstrap for the R-estimator.
//!
//! Each replicate perturbs the rank estimating equation with exchangeable
//! weights, runs `k*` weighted one-step updates from `θ̂_φ` and divides the
//! ω, α and γ slots by the original `ĉ`. Intervals come from the replicate
//! deviations `(θ̂* − θ̂)/σ_n`, where `σ_n²` is the weight variance.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Binomial, Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{rescale, FitResult, RankEngine};
use crate::model::{ModelSpec, ParamVector};
use crate::rng::{self, Rng};
use crate::scores::ScoreFunction;

/// Below this many replicates intervals are refused.
pub const MIN_REPLICATES: usize = 20;
/// Below this many replicates intervals are flagged as unreliable.
pub const RECOMMENDED_REPLICATES: usize = 100;
/// Default number of weighted updates per replicate.
pub const DEFAULT_K_STAR: usize = 20;

/// Exchangeable weight schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightScheme {
    /// Multinomial(n; 1/n, …, 1/n) counts.
    M,
    /// Normalised i.i.d. standard exponentials.
    E,
    /// Normalised i.i.d. Uniform(0.5, 1.5).
    U,
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightScheme::M => "m",
            WeightScheme::E => "e",
            WeightScheme::U => "u",
        })
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m" => Ok(Self::M),
            "e" => Ok(Self::E),
            "u" => Ok(Self::U),
            other => Err(Error::InvalidConfig(format!("unknown weight scheme '{other}'"))),
        }
    }
}

/// Source of `σ_n²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SigmaMode {
    /// `1 − 1/n` for M, `1` for E, `1/12` for U.
    Theoretical,
    /// Mean over replicates of each weight vector's variance.
    Empirical,
}

impl fmt::Display for SigmaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SigmaMode::Theoretical => "theoretical",
            SigmaMode::Empirical => "empirical",
        })
    }
}

impl FromStr for SigmaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "theoretical" => Ok(Self::Theoretical),
            "empirical" => Ok(Self::Empirical),
            other => Err(Error::InvalidConfig(format!("unknown sigma mode '{other}'"))),
        }
    }
}

/// Draws `n` weights. Schemes E and U sum to `n` up to rounding; M sums to `n` exactly.
pub fn draw_weights(scheme: WeightScheme, n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InsufficientData { n, m: 2 });
    }
    let normalise = |mut w: Vec<f64>| {
        let k = n as f64 / w.iter().sum::<f64>();
        w.iter_mut().for_each(|v| *v *= k);
        w
    };
    Ok(match scheme {
        WeightScheme::M => {
            // Sequential conditional binomials.
            let mut left = n as u64;
            let mut w = Vec::with_capacity(n);
            for i in 0..n {
                let cells = (n - i) as f64;
                let c = if i + 1 == n || left == 0 {
                    left
                } else {
                    Binomial::new(left, 1.0 / cells)
                        .expect("probability in (0,1]")
                        .sample(rng)
                };
                left -= c;
                w.push(c as f64);
            }
            w
        }
        WeightScheme::E => normalise((0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect()),
        WeightScheme::U => normalise((0..n).map(|_| rng.random_range(0.5..1.5)).collect()),
    })
}

/// Theoretical weight variance `σ_n²`.
pub fn weight_variance(scheme: WeightScheme, n: usize) -> f64 {
    match scheme {
        WeightScheme::M => 1.0 - 1.0 / n as f64,
        WeightScheme::E => 1.0,
        WeightScheme::U => 1.0 / 12.0,
    }
}

/// Variance of one weight vector (denominator `n`).
pub fn empirical_weight_variance(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// `σ_n`, the standard deviation of the weights, by which replicate deviations are divided.
pub fn sigma_n(scheme: WeightScheme, n: usize) -> f64 {
    weight_variance(scheme, n).sqrt()
}

/// `n^{-1/2} Σ w_t (v̇/v)(1 − φ(R_t/(n+1)) ε_t)`.
pub fn weighted_central_sequence(
    theta: &ParamVector,
    x: &[f64],
    score: ScoreFunction,
    w: &[f64],
) -> Result<Vec<f64>> {
    let mut engine = RankEngine::new(score, x.len());
    let sums = engine.sums(theta, x, Some(w), false)?;
    let k = 1.0 / (x.len() as f64).sqrt();
    Ok(sums.b.iter().map(|v| k * v).collect())
}

/// One bootstrap replicate with the unweighted information matrix and ρ = 1.
pub fn bootstrap_replicate(
    theta_phi_hat: &ParamVector,
    x: &[f64],
    score: ScoreFunction,
    w: &[f64],
    k_star: usize,
    c_hat: f64,
) -> Result<ParamVector> {
    let mut engine = RankEngine::new(score, x.len());
    replicate_with(&mut engine, theta_phi_hat, x, w, k_star, c_hat, false, 1.0)
}

#[allow(clippy::too_many_arguments)]
fn replicate_with(
    engine: &mut RankEngine,
    theta_phi_hat: &ParamVector,
    x: &[f64],
    w: &[f64],
    k_star: usize,
    c_hat: f64,
    weighted_info: bool,
    rho: f64,
) -> Result<ParamVector> {
    if k_star == 0 {
        return Err(Error::InvalidConfig("k* must be at least 1".into()));
    }
    let mut theta = theta_phi_hat.clone();
    for _ in 0..k_star {
        theta = engine.step(&theta, x, Some(w), weighted_info, rho)?;
    }
    Ok(rescale(&theta, c_hat))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub scheme: WeightScheme,
    /// Number of replicates B.
    pub replicates: usize,
    /// Weighted updates per replicate. Each update only halves the distance to the
    /// weighted root for scores with ρ(φ) < 1, so this matches the fit's own budget.
    pub k_star: usize,
    pub sigma_mode: SigmaMode,
    /// Weight the information matrix as well as the score.
    pub weighted_info: bool,
    pub rho: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            scheme: WeightScheme::U,
            replicates: 2000,
            k_star: DEFAULT_K_STAR,
            sigma_mode: SigmaMode::Theoretical,
            weighted_info: false,
            rho: 1.0,
            seed: 0,
        }
    }
}

/// Surviving replicates plus what is needed to turn them into intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapRun {
    pub theta_hat: ParamVector,
    /// One flat parameter vector per surviving replicate, in stream order.
    pub replicates: Vec<Vec<f64>>,
    /// Stream index of each surviving replicate.
    pub streams: Vec<u64>,
    pub scheme: WeightScheme,
    pub sigma_mode: SigmaMode,
    pub sigma_n: f64,
    pub requested: usize,
    pub failures: usize,
    pub seed: u64,
}

impl BootstrapRun {
    pub fn spec(&self) -> ModelSpec {
        self.theta_hat.spec()
    }

    pub fn len(&self) -> usize {
        self.replicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicates.is_empty()
    }

    /// True when fewer than the recommended number of replicates survived.
    pub fn is_low_b(&self) -> bool {
        self.replicates.len() < RECOMMENDED_REPLICATES
    }
}

/// Runs B replicates in parallel; replicate `i` uses stream `(seed, bootstrap, i)`.
pub fn bootstrap_distribution(
    fit: &FitResult,
    x: &[f64],
    score: ScoreFunction,
    cfg: &BootstrapConfig,
) -> Result<BootstrapRun> {
    if cfg.replicates == 0 {
        return Err(Error::InvalidConfig("B must be at least 1".into()));
    }
    if cfg.k_star == 0 {
        return Err(Error::InvalidConfig("k* must be at least 1".into()));
    }
    let n = x.len();
    let template = RankEngine::new(score, n);
    let outcomes: Vec<Result<(Vec<f64>, f64)>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(cfg.seed, rng::TAG_BOOTSTRAP, i);
            let w = draw_weights(cfg.scheme, n, &mut r)?;
            let mut engine = template.clone();
            let theta = replicate_with(
                &mut engine,
                &fit.theta_phi,
                x,
                &w,
                cfg.k_star,
                fit.c_hat,
                cfg.weighted_info,
                cfg.rho,
            )?;
            Ok((theta.to_flat(), empirical_weight_variance(&w)))
        })
        .collect();

    let mut replicates = Vec::with_capacity(cfg.replicates);
    let mut streams = Vec::with_capacity(cfg.replicates);
    let mut var_sum = 0.0;
    let mut failures = 0;
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok((theta, v)) => {
                replicates.push(theta);
                streams.push(i as u64);
                var_sum += v;
            }
            Err(e @ (Error::InsufficientData { .. } | Error::InvalidConfig(_))) => return Err(e),
            Err(_) => failures += 1,
        }
    }
    if failures * 10 > cfg.replicates {
        return Err(Error::TooManyFailures {
            failed: failures,
            total: cfg.replicates,
        });
    }
    let sigma_n = match cfg.sigma_mode {
        SigmaMode::Theoretical => sigma_n(cfg.scheme, n),
        SigmaMode::Empirical => (var_sum / replicates.len() as f64).sqrt(),
    };
    Ok(BootstrapRun {
        theta_hat: fit.theta.clone(),
        replicates,
        streams,
        scheme: cfg.scheme,
        sigma_mode: cfg.sigma_mode,
        sigma_n,
        requested: cfg.replicates,
        failures,
        seed: cfg.seed,
    })
}

/// Sample quantile with linear interpolation between order statistics
/// (the `(N−1)p` rule). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub param: String,
    pub index: usize,
    pub level: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Equal-tailed intervals from the σ_n-rescaled replicate deviations
/// `d = (θ̂* − θ̂)/σ_n`: `[θ̂ − q_{(1+ℓ)/2}(d), θ̂ − q_{(1−ℓ)/2}(d)]`.
///
/// Ordered by level, then parameter.
pub fn confidence_intervals(run: &BootstrapRun, levels: &[f64]) -> Result<Vec<Interval>> {
    if run.replicates.len() < MIN_REPLICATES {
        return Err(Error::InsufficientReplicates {
            needed: MIN_REPLICATES,
            got: run.replicates.len(),
        });
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::DomainError(*l));
    }
    if !(run.sigma_n > 0.0) {
        return Err(Error::InvalidConfig(format!("sigma_n must be positive, got {}", run.sigma_n)));
    }
    let names = run.spec().param_names();
    let est = run.theta_hat.to_flat();
    let mut devs: Vec<Vec<f64>> = (0..est.len())
        .map(|j| {
            let mut d: Vec<f64> = run
                .replicates
                .iter()
                .map(|r| (r[j] - est[j]) / run.sigma_n)
                .collect();
            d.sort_by(f64::total_cmp);
            d
        })
        .collect();
    let mut out = Vec::with_capacity(levels.len() * est.len());
    for &level in levels {
        for (j, d) in devs.iter_mut().enumerate() {
            let hi = quantile_sorted(d, 0.5 * (1.0 + level));
            let lo = quantile_sorted(d, 0.5 * (1.0 - level));
            out.push(Interval {
                param: names[j].clone(),
                index: j,
                level,
                estimate: est[j],
                lower: est[j] - hi,
                upper: est[j] - lo,
            });
        }
    }
    Ok(out)
}
