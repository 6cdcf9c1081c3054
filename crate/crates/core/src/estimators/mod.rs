//! R-estimation of GARCH/GJR parameters and the QMLE/LAD baselines.
//!
//! The R-estimator iterates the one-step update
//!
//! ```text
//! θ ← θ − (2/(1+ρ)) · [Σ v̇v̇'/v²]⁻¹ · Σ (v̇/v)(1 − φ(R_t/(n+1)) x_t/√v)
//! ```
//!
//! to a fixed point `θ̂_φ`, estimates the identifiability scale `ĉ` and divides the
//! ω, α and γ slots by it.

mod lad;
mod qmle;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{filter_variance_gradient, mean_square, Family, ModelSpec, ParamVector};
use crate::scores::{rank_into, ScoreFunction};

pub use lad::{fit_lad, lad_objective};
pub use qmle::{fit_qmle, qmle_objective};

/// Lower bound for ω, α and γ after a Newton step.
pub const COEF_FLOOR: f64 = 1e-12;
/// Each β is kept in `[BETA_MARGIN, 1 - BETA_MARGIN]`.
pub const BETA_MARGIN: f64 = 1e-6;
const MAX_HALVINGS: usize = 10;
const MAX_CONDITION: f64 = 1e12;

/// Which estimator produced a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    Qmle,
    Lad,
    Rank(ScoreFunction),
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Qmle => f.write_str("qmle"),
            Estimator::Lad => f.write_str("lad"),
            Estimator::Rank(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qmle" => Ok(Self::Qmle),
            "lad" => Ok(Self::Lad),
            other => other.parse().map(Self::Rank),
        }
    }
}

/// Starting point for the R-estimator iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Init {
    Qmle,
    Lad,
    UserSupplied(ParamVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub score: ScoreFunction,
    pub init: Init,
    /// Maximum number of one-step updates (k).
    pub max_iter: usize,
    /// Relative step-norm tolerance.
    pub tol: f64,
    /// The step is multiplied by `2 / (1 + rho)`.
    pub rho: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            score: ScoreFunction::Vdw,
            init: Init::Qmle,
            max_iter: 20,
            tol: 1e-8,
            rho: 1.0,
        }
    }
}

impl FitConfig {
    pub fn with_score(score: ScoreFunction) -> Self {
        Self {
            score,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.rho > -1.0) || !self.rho.is_finite() {
            return Err(Error::InvalidConfig(format!("rho must exceed -1, got {}", self.rho)));
        }
        Ok(())
    }
}

/// Output of any of the estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub estimator: Estimator,
    /// Raw estimate before rescaling (θ̂_φ).
    pub theta_phi: ParamVector,
    pub c_hat: f64,
    /// Rescaled estimate θ̂_n.
    pub theta: ParamVector,
    pub iterations_used: usize,
    pub converged: bool,
    /// Relative step norms of successive updates (empty for QMLE/LAD).
    pub step_norms: Vec<f64>,
}

/// Divides the ω, α and γ slots by `c`.
pub fn rescale(theta_phi: &ParamVector, c: f64) -> ParamVector {
    let mut out = theta_phi.clone();
    out.omega /= c;
    out.alpha.iter_mut().for_each(|a| *a /= c);
    out.gamma.iter_mut().for_each(|g| *g /= c);
    out
}

/// `ĉ = (ω̂_φ/X̄² + Σα̂_φ + Σγ̂_φ/2) / (1 − Σβ̂)`.
///
/// The γ term is zero for GARCH; for GJR it assumes symmetric innovations,
/// under which half of the observations switch the leverage term on.
pub fn estimate_scale_c(theta_phi: &ParamVector, x: &[f64]) -> Result<f64> {
    let xbar2 = mean_square(x);
    if !(xbar2 > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let bsum = theta_phi.beta_sum();
    if bsum >= 1.0 {
        return Err(Error::ExplosiveBeta(bsum));
    }
    let arch: f64 =
        theta_phi.alpha.iter().sum::<f64>() + 0.5 * theta_phi.gamma.iter().sum::<f64>();
    Ok((theta_phi.omega / xbar2 + arch) / (1.0 - bsum))
}

/// Intercept implied by an ARCH coefficient vector in variance-normalised units:
/// `ω̂ = (1 + Σâ·X̄²)⁻¹ (1 − Σβ̂) X̄²`.
pub fn ba_intercept(a_hat: &[f64], beta_hat: &[f64], xbar2: f64) -> Result<f64> {
    if let Some(i) = a_hat
        .iter()
        .chain(beta_hat)
        .chain(std::iter::once(&xbar2))
        .position(|v| !v.is_finite())
    {
        return Err(Error::NonFiniteInput(i));
    }
    if !(xbar2 > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let bsum: f64 = beta_hat.iter().sum();
    if bsum >= 1.0 {
        return Err(Error::ExplosiveBeta(bsum));
    }
    let asum: f64 = a_hat.iter().sum();
    Ok((1.0 - bsum) * xbar2 / (1.0 + asum * xbar2))
}

/// Scratch space for repeated evaluations of the rank-based estimating equation
/// on one series: the score table and the ranking buffers are built once.
#[derive(Clone)]
pub(crate) struct RankEngine {
    table: Vec<f64>,
    order: Vec<usize>,
    ranks: Vec<usize>,
    eps: Vec<f64>,
}

/// Sums `A = Σ c_t v̇v̇'/v²` and `b = Σ w_t (v̇/v)(1 − φ(R_t/(n+1)) ε_t)`.
pub(crate) struct Sums {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl RankEngine {
    pub fn new(score: ScoreFunction, n: usize) -> Self {
        Self {
            table: score.table(n),
            order: vec![0; n],
            ranks: vec![0; n],
            eps: vec![0.0; n],
        }
    }

    /// `weights = None` means `w ≡ 1`. With `weighted_info` the weights also enter `A`.
    pub fn sums(
        &mut self,
        theta: &ParamVector,
        x: &[f64],
        weights: Option<&[f64]>,
        weighted_info: bool,
    ) -> Result<Sums> {
        let n = x.len();
        if n != self.table.len() {
            return Err(Error::DimensionMismatch {
                expected: self.table.len(),
                got: n,
            });
        }
        if let Some(w) = weights {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: w.len(),
                });
            }
        }
        let filt = filter_variance_gradient(theta, x)?;
        let m = filt.dim();
        for t in 0..n {
            self.eps[t] = x[t] / filt.v[t].sqrt();
        }
        rank_into(&self.eps, &mut self.order, &mut self.ranks);

        let mut a = vec![0.0; m * m];
        let mut b = vec![0.0; m];
        for t in 0..n {
            let vt = filt.v[t];
            let g = filt.grad_row(t);
            let wt = weights.map_or(1.0, |w| w[t]);
            let bracket = 1.0 - self.table[self.ranks[t] - 1] * self.eps[t];
            let cb = wt * bracket / vt;
            let ca = if weighted_info { wt } else { 1.0 } / (vt * vt);
            for i in 0..m {
                b[i] += cb * g[i];
                let gi = ca * g[i];
                for j in 0..=i {
                    a[i * m + j] += gi * g[j];
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                a[j * m + i] = a[i * m + j];
            }
        }
        Ok(Sums {
            a: DMatrix::from_row_slice(m, m, &a),
            b: DVector::from_vec(b),
        })
    }

    /// One safeguarded Newton step from `theta`.
    pub fn step(
        &mut self,
        theta: &ParamVector,
        x: &[f64],
        weights: Option<&[f64]>,
        weighted_info: bool,
        rho: f64,
    ) -> Result<ParamVector> {
        let sums = self.sums(theta, x, weights, weighted_info)?;
        let delta = solve_information(&sums.a, &sums.b)?;
        let scale = 2.0 / (1.0 + rho);
        apply_step(theta, &delta.iter().map(|d| scale * d).collect::<Vec<_>>())
    }
}

/// Solves `A s = b` for symmetric positive definite `A`.
///
/// `A` is first scaled to unit diagonal so the condition check is unaffected by
/// the very different magnitudes of ω and the dimensionless coefficients.
pub(crate) fn solve_information(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let m = a.nrows();
    let d: Vec<f64> = (0..m).map(|i| a[(i, i)]).collect();
    if d.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::SingularInformation {
            condition: f64::INFINITY,
        });
    }
    let s: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let scaled = DMatrix::from_fn(m, m, |i, j| a[(i, j)] * s[i] * s[j]);
    let eig = scaled.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularInformation { condition });
    }
    let chol = scaled
        .cholesky()
        .ok_or(Error::SingularInformation { condition })?;
    let rhs = DVector::from_fn(m, |i, _| b[i] * s[i]);
    let y = chol.solve(&rhs);
    let out = DVector::from_fn(m, |i, _| y[i] * s[i]);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteStep);
    }
    Ok(out)
}

fn admissible(theta: &[f64], spec: &ModelSpec) -> bool {
    let b0 = spec.beta_offset();
    let coef_ok = theta[..b0].iter().all(|v| *v >= COEF_FLOOR);
    let betas = &theta[b0..];
    let beta_ok = betas
        .iter()
        .all(|b| (BETA_MARGIN..=1.0 - BETA_MARGIN).contains(b));
    coef_ok && beta_ok && betas.iter().sum::<f64>() <= 1.0 - BETA_MARGIN
}

/// Projects onto the admissible region: floors on ω, α, γ, a box on each β and,
/// when q > 1, a proportional shrink of the β's so that Σβ stays below one.
fn clamp(theta: &mut [f64], spec: &ModelSpec) {
    let b0 = spec.beta_offset();
    for v in &mut theta[..b0] {
        *v = v.max(COEF_FLOOR);
    }
    for b in &mut theta[b0..] {
        *b = b.clamp(BETA_MARGIN, 1.0 - BETA_MARGIN);
    }
    let bsum: f64 = theta[b0..].iter().sum();
    if bsum > 1.0 - BETA_MARGIN {
        let f = (1.0 - BETA_MARGIN) / bsum;
        theta[b0..].iter_mut().for_each(|b| *b *= f);
    }
}

/// `θ − δ`, halving `δ` up to ten times while the result is outside the region,
/// then clamping whatever remains.
fn apply_step(theta: &ParamVector, delta: &[f64]) -> Result<ParamVector> {
    let spec = theta.spec();
    let base = theta.to_flat();
    let mut t = 1.0;
    let mut cand: Vec<f64> = base.iter().zip(delta).map(|(b, d)| b - d).collect();
    for _ in 0..MAX_HALVINGS {
        if admissible(&cand, &spec) {
            break;
        }
        t *= 0.5;
        cand = base.iter().zip(delta).map(|(b, d)| b - t * d).collect();
    }
    if cand.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteStep);
    }
    clamp(&mut cand, &spec);
    ParamVector::from_flat(spec, &cand)
}

fn relative_change(old: &ParamVector, new: &ParamVector) -> f64 {
    let (a, b) = (old.to_flat(), new.to_flat());
    let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / (norm + 1e-12)
}

/// Rank-based central sequence `R̂_n(θ) = n^{-1/2} Σ (v̇/v)(1 − φ(R_t/(n+1)) ε_t)`.
pub fn rank_central_sequence(
    theta: &ParamVector,
    x: &[f64],
    score: ScoreFunction,
) -> Result<Vec<f64>> {
    let mut engine = RankEngine::new(score, x.len());
    let sums = engine.sums(theta, x, None, false)?;
    let k = 1.0 / (x.len() as f64).sqrt();
    Ok(sums.b.iter().map(|v| k * v).collect())
}

/// `Ĵ_n(θ) = n^{-1} Σ v̇v̇'/v²`.
pub fn jhat_matrix(theta: &ParamVector, x: &[f64]) -> Result<DMatrix<f64>> {
    let filt = filter_variance_gradient(theta, x)?;
    let m = filt.dim();
    let mut j = DMatrix::zeros(m, m);
    for t in 0..filt.len() {
        let g = DVector::from_column_slice(filt.grad_row(t));
        j += (&g * g.transpose()) / (filt.v[t] * filt.v[t]);
    }
    Ok(j / x.len() as f64)
}

/// A single safeguarded update with the default ρ = 1.
pub fn one_step_update(theta: &ParamVector, x: &[f64], score: ScoreFunction) -> Result<ParamVector> {
    RankEngine::new(score, x.len()).step(theta, x, None, false, 1.0)
}

/// Crude start used when both baseline optimizers fail.
pub fn moment_start(x: &[f64], spec: ModelSpec) -> Result<ParamVector> {
    let xbar2 = mean_square(x);
    if !(xbar2 > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let (p, q) = (spec.p as f64, spec.q as f64);
    let omega = 0.1 * xbar2 * (1.0 - 0.85);
    let beta = vec![0.85 / q; spec.q];
    match spec.family {
        Family::Garch => ParamVector::garch(omega, vec![0.1 / p; spec.p], beta),
        // Splitting the ARCH mass keeps the start stationary.
        Family::Gjr => ParamVector::gjr(omega, vec![0.05 / p; spec.p], vec![0.05 / p; spec.p], beta),
    }
}

fn check_length(x: &[f64], spec: ModelSpec) -> Result<()> {
    if x.len() <= spec.dim() {
        return Err(Error::InsufficientData {
            n: x.len(),
            m: spec.dim(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput(i));
    }
    Ok(())
}

/// Resolves the initial estimate: QMLE, then LAD, then the moment start,
/// falling through whenever an optimizer does not converge.
pub fn initial_estimate(x: &[f64], spec: ModelSpec, init: &Init) -> Result<ParamVector> {
    match init {
        Init::UserSupplied(theta) => {
            if theta.spec() != spec {
                return Err(Error::InitFailed(format!(
                    "initial value is {} but the model is {spec}",
                    theta.spec()
                )));
            }
            theta
                .validate(false)
                .map_err(|e| Error::InitFailed(e.to_string()))?;
            Ok(theta.clone())
        }
        Init::Qmle => match fit_qmle(x, spec, None) {
            Ok(fit) if fit.converged => Ok(fit.theta),
            _ => initial_estimate(x, spec, &Init::Lad),
        },
        Init::Lad => match fit_lad(x, spec, None) {
            Ok(fit) if fit.converged => Ok(fit.theta),
            _ => moment_start(x, spec).map_err(|e| Error::InitFailed(e.to_string())),
        },
    }
}

/// Iterates the one-step update from the configured start, then rescales.
pub fn fit_r_estimator(x: &[f64], cfg: &FitConfig, spec: ModelSpec) -> Result<FitResult> {
    cfg.validate()?;
    check_length(x, spec)?;
    let start = initial_estimate(x, spec, &cfg.init)?;
    let mut engine = RankEngine::new(cfg.score, x.len());
    let mut theta = start;
    let mut step_norms = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let next = engine.step(&theta, x, None, false, cfg.rho)?;
        let rel = relative_change(&theta, &next);
        step_norms.push(rel);
        theta = next;
        if rel < cfg.tol {
            converged = true;
            break;
        }
    }
    let c_hat = estimate_scale_c(&theta, x)?;
    Ok(FitResult {
        estimator: Estimator::Rank(cfg.score),
        theta: rescale(&theta, c_hat),
        theta_phi: theta,
        c_hat,
        iterations_used: step_norms.len(),
        converged,
        step_norms,
    })
}

/// Dispatches to the estimator named by `which`.
pub fn fit(x: &[f64], which: Estimator, cfg: &FitConfig, spec: ModelSpec) -> Result<FitResult> {
    let user_init = match &cfg.init {
        Init::UserSupplied(t) => Some(t),
        _ => None,
    };
    match which {
        Estimator::Qmle => fit_qmle(x, spec, user_init),
        Estimator::Lad => fit_lad(x, spec, user_init),
        Estimator::Rank(score) => fit_r_estimator(x, &FitConfig { score, ..cfg.clone() }, spec),
    }
}

/// Maps the flat parameter vector into the unconstrained optimisation space:
/// logarithms for ω, α, γ and logits for β.
pub(crate) fn to_unconstrained(theta: &ParamVector) -> Vec<f64> {
    let b0 = theta.spec().beta_offset();
    theta
        .to_flat()
        .iter()
        .enumerate()
        .map(|(k, &v)| if k < b0 { v.ln() } else { (v / (1.0 - v)).ln() })
        .collect()
}

/// Inverse of [`to_unconstrained`] plus the diagonal Jacobian `dθ/du`.
pub(crate) fn from_unconstrained(u: &[f64], spec: ModelSpec) -> Option<(ParamVector, Vec<f64>)> {
    let b0 = spec.beta_offset();
    let mut theta = Vec::with_capacity(u.len());
    let mut jac = Vec::with_capacity(u.len());
    for (k, &uk) in u.iter().enumerate() {
        if k < b0 {
            let v = uk.exp();
            theta.push(v);
            jac.push(v);
        } else {
            let v = 1.0 / (1.0 + (-uk).exp());
            theta.push(v);
            jac.push(v * (1.0 - v));
        }
    }
    let valid = theta.iter().all(|v| v.is_finite() && *v > 0.0)
        && theta[..b0].iter().all(|v| *v < 1e300)
        && theta[b0..].iter().sum::<f64>() < 1.0;
    if !valid {
        return None;
    }
    ParamVector::from_flat(spec, &theta).ok().map(|p| (p, jac))
}
