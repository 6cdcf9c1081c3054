//! GARCH(p,q) and GJR(p,q) parameterisation and the conditional-variance filter.
//!
//! The filter evaluates the observable variance function
//!
//! ```text
//! v_t(θ) = ω + Σ_i (α_i + γ_i·1{x_{t-i} < 0}) x²_{t-i} + Σ_j β_j v_{t-j}(θ)
//! ```
//!
//! with pre-sample values `v_s = ω / (1 - Σβ)` and `x_s = 0` for `s ≤ 0`. This is
//! exactly the truncated ARCH(∞) expansion `c_0 + Σ_{j<t} c_j x²_{t-j}` evaluated in
//! O(n) time. The gradient with respect to θ is propagated through the same
//! recursion in a single pass.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volatility model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Garch,
    Gjr,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Garch => f.write_str("garch"),
            Family::Gjr => f.write_str("gjr"),
        }
    }
}

/// Model family together with its ARCH order `p` and GARCH order `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub p: usize,
    pub q: usize,
}

impl ModelSpec {
    pub fn new(family: Family, p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::UnsupportedSpec(format!(
                "orders must be at least 1 (p = {p}, q = {q})"
            )));
        }
        Ok(Self { family, p, q })
    }

    pub fn garch(p: usize, q: usize) -> Self {
        Self::new(Family::Garch, p, q).expect("GARCH orders must be positive")
    }

    pub fn gjr(p: usize, q: usize) -> Self {
        Self::new(Family::Gjr, p, q).expect("GJR orders must be positive")
    }

    /// Number of free parameters `m`.
    pub fn dim(&self) -> usize {
        match self.family {
            Family::Garch => 1 + self.p + self.q,
            Family::Gjr => 1 + 2 * self.p + self.q,
        }
    }

    pub(crate) fn alpha_offset(&self) -> usize {
        1
    }

    pub(crate) fn gamma_offset(&self) -> Option<usize> {
        match self.family {
            Family::Garch => None,
            Family::Gjr => Some(1 + self.p),
        }
    }

    pub(crate) fn beta_offset(&self) -> usize {
        match self.family {
            Family::Garch => 1 + self.p,
            Family::Gjr => 1 + 2 * self.p,
        }
    }

    /// Whether flat index `k` multiplies a squared return (ω, α or γ slot).
    /// These are the components that carry the score-dependent scale.
    pub fn is_scaled_slot(&self, k: usize) -> bool {
        k < self.beta_offset()
    }

    /// Parameter labels in flat order: `omega, alpha1.., gamma1.., beta1..`.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = vec!["omega".to_string()];
        let single_p = self.p == 1;
        let single_q = self.q == 1;
        let label = |base: &str, i: usize, single: bool| {
            if single {
                base.to_string()
            } else {
                format!("{base}{i}")
            }
        };
        names.extend((1..=self.p).map(|i| label("alpha", i, single_p)));
        if self.family == Family::Gjr {
            names.extend((1..=self.p).map(|i| label("gamma", i, single_p)));
        }
        names.extend((1..=self.q).map(|j| label("beta", j, single_q)));
        names
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.family, self.p, self.q)
    }
}

/// A point θ in the parameter space of a GARCH or GJR model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    spec: ModelSpec,
    pub omega: f64,
    pub alpha: Vec<f64>,
    /// Leverage coefficients; empty for GARCH.
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ParamVector {
    pub fn garch(omega: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let spec = ModelSpec::new(Family::Garch, alpha.len(), beta.len())?;
        Ok(Self {
            spec,
            omega,
            alpha,
            gamma: Vec::new(),
            beta,
        })
    }

    pub fn gjr(omega: f64, alpha: Vec<f64>, gamma: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if gamma.len() != alpha.len() {
            return Err(Error::DimensionMismatch {
                expected: alpha.len(),
                got: gamma.len(),
            });
        }
        let spec = ModelSpec::new(Family::Gjr, alpha.len(), beta.len())?;
        Ok(Self {
            spec,
            omega,
            alpha,
            gamma,
            beta,
        })
    }

    /// Shorthand for a GARCH(1,1) point.
    pub fn garch11(omega: f64, alpha: f64, beta: f64) -> Self {
        Self::garch(omega, vec![alpha], vec![beta]).expect("orders are 1")
    }

    /// Shorthand for a GJR(1,1) point.
    pub fn gjr11(omega: f64, alpha: f64, gamma: f64, beta: f64) -> Self {
        Self::gjr(omega, vec![alpha], vec![gamma], vec![beta]).expect("orders are 1")
    }

    /// Builds a parameter vector from its flat representation
    /// `(ω, α_1..α_p, [γ_1..γ_p,] β_1..β_q)`.
    pub fn from_flat(spec: ModelSpec, values: &[f64]) -> Result<Self> {
        if values.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: values.len(),
            });
        }
        let a0 = spec.alpha_offset();
        let b0 = spec.beta_offset();
        let gamma = match spec.gamma_offset() {
            Some(g0) => values[g0..g0 + spec.p].to_vec(),
            None => Vec::new(),
        };
        Ok(Self {
            spec,
            omega: values[0],
            alpha: values[a0..a0 + spec.p].to_vec(),
            gamma,
            beta: values[b0..b0 + spec.q].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.spec.dim());
        out.push(self.omega);
        out.extend_from_slice(&self.alpha);
        out.extend_from_slice(&self.gamma);
        out.extend_from_slice(&self.beta);
        out
    }

    pub fn spec(&self) -> ModelSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn beta_sum(&self) -> f64 {
        self.beta.iter().sum()
    }

    /// `Σα + Σγ/2 + Σβ`; for GJR this assumes symmetric innovations.
    pub fn persistence(&self) -> f64 {
        self.alpha.iter().sum::<f64>() + 0.5 * self.gamma.iter().sum::<f64>() + self.beta_sum()
    }

    /// Unconditional variance `ω / (1 - persistence)`, if finite.
    pub fn unconditional_variance(&self) -> Option<f64> {
        let denom = 1.0 - self.persistence();
        (denom > 0.0).then(|| self.omega / denom)
    }

    /// `c_0(θ) = ω / (1 - Σβ)`, the floor of the variance filter.
    pub fn c0(&self) -> f64 {
        self.omega / (1.0 - self.beta_sum())
    }

    /// Checks positivity of every component and, optionally, second-order stationarity.
    pub fn validate(&self, require_stationary: bool) -> Result<()> {
        let expected_gamma = match self.spec.family {
            Family::Garch => 0,
            Family::Gjr => self.spec.p,
        };
        if self.alpha.len() != self.spec.p {
            return Err(Error::DimensionMismatch {
                expected: self.spec.p,
                got: self.alpha.len(),
            });
        }
        if self.gamma.len() != expected_gamma {
            return Err(Error::DimensionMismatch {
                expected: expected_gamma,
                got: self.gamma.len(),
            });
        }
        if self.beta.len() != self.spec.q {
            return Err(Error::DimensionMismatch {
                expected: self.spec.q,
                got: self.beta.len(),
            });
        }
        let names = self.spec.param_names();
        for (name, value) in names.into_iter().zip(self.to_flat()) {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveParameter { name, value });
            }
        }
        if self.beta_sum() >= 1.0 {
            return Err(Error::ExplosiveBeta(self.beta_sum()));
        }
        if require_stationary && self.persistence() >= 1.0 {
            return Err(Error::NonStationary {
                persistence: self.persistence(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .spec
            .param_names()
            .iter()
            .zip(self.to_flat())
            .map(|(n, v)| format!("{n}={v:.6e}"))
            .collect();
        write!(f, "{} [{}]", self.spec, parts.join(", "))
    }
}

/// Returns `theta` unchanged if it is a valid interior point.
pub fn validate_params(theta: ParamVector, require_stationary: bool) -> Result<ParamVector> {
    theta.validate(require_stationary)?;
    Ok(theta)
}

/// An observed return series: non-empty and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Series(Vec<f64>);

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { n: 0, m: 1 });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(i));
        }
        Ok(Self(values))
    }

    /// `n⁻¹ Σ x_t²`.
    pub fn mean_square(&self) -> f64 {
        mean_square(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Series {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn mean_square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Coefficients `c_0..c_{j_max}` of the ARCH(∞) expansion of a GARCH(1,1) variance:
/// `c_0 = ω/(1-β)`, `c_j = α β^{j-1}`.
pub fn expansion_coefficients(theta: &ParamVector, j_max: usize) -> Result<Vec<f64>> {
    let spec = theta.spec();
    if spec.family != Family::Garch || spec.p != 1 || spec.q != 1 {
        return Err(Error::UnsupportedSpec(format!(
            "expansion coefficients are only available for garch(1,1), got {spec}"
        )));
    }
    let (omega, alpha, beta) = (theta.omega, theta.alpha[0], theta.beta[0]);
    if beta >= 1.0 {
        return Err(Error::ExplosiveBeta(beta));
    }
    let mut out = Vec::with_capacity(j_max + 1);
    out.push(omega / (1.0 - beta));
    let mut pow = 1.0;
    for _ in 1..=j_max {
        out.push(alpha * pow);
        pow *= beta;
    }
    Ok(out)
}

/// Conditional variances together with their gradient with respect to θ.
#[derive(Debug, Clone)]
pub struct VarianceFilter {
    /// `v̂_t(θ)` for `t = 1..n`.
    pub v: Vec<f64>,
    grad: Vec<f64>,
    m: usize,
}

impl VarianceFilter {
    /// `∂v̂_t/∂θ` as a slice of length `m` (`t` is zero based).
    pub fn grad_row(&self, t: usize) -> &[f64] {
        &self.grad[t * self.m..(t + 1) * self.m]
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }
}

/// Domain check needed by the filter: ω > 0, non-negative coefficients, Σβ < 1.
fn check_filter_domain(theta: &ParamVector) -> Result<()> {
    let names = theta.spec().param_names();
    for (k, value) in theta.to_flat().into_iter().enumerate() {
        let ok = if k == 0 { value > 0.0 } else { value >= 0.0 };
        if !ok || !value.is_finite() {
            return Err(Error::NonPositiveParameter {
                name: names[k].clone(),
                value,
            });
        }
    }
    if theta.beta_sum() >= 1.0 {
        return Err(Error::ExplosiveBeta(theta.beta_sum()));
    }
    Ok(())
}

/// Observable conditional variances `v̂_1..v̂_n` for GARCH or GJR parameters.
pub fn filter_variance(theta: &ParamVector, x: &[f64]) -> Result<Vec<f64>> {
    check_filter_domain(theta)?;
    let spec = theta.spec();
    let n = x.len();
    let c0 = theta.c0();
    let mut v = Vec::with_capacity(n);
    for t in 0..n {
        let mut vt = theta.omega;
        for i in 1..=spec.p.min(t) {
            let xl = x[t - i];
            let mut a = theta.alpha[i - 1];
            if spec.family == Family::Gjr && xl < 0.0 {
                a += theta.gamma[i - 1];
            }
            vt += a * xl * xl;
        }
        for j in 1..=spec.q {
            let lag = if j <= t { v[t - j] } else { c0 };
            vt += theta.beta[j - 1] * lag;
        }
        if !(vt > 0.0) {
            return Err(Error::NonPositiveVariance { t: t + 1 });
        }
        v.push(vt);
    }
    Ok(v)
}

/// GJR-specific entry point; rejects GARCH parameter vectors.
pub fn gjr_filter_variance(theta: &ParamVector, x: &[f64]) -> Result<Vec<f64>> {
    if theta.spec().family != Family::Gjr {
        return Err(Error::UnsupportedSpec(format!(
            "expected gjr parameters, got {}",
            theta.spec()
        )));
    }
    filter_variance(theta, x)
}

/// Conditional variances and their analytic gradient, by forward recursion.
pub fn filter_variance_gradient(theta: &ParamVector, x: &[f64]) -> Result<VarianceFilter> {
    check_filter_domain(theta)?;
    let spec = theta.spec();
    let n = x.len();
    let m = spec.dim();
    let a0 = spec.alpha_offset();
    let g0 = spec.gamma_offset();
    let b0 = spec.beta_offset();
    let one_minus = 1.0 - theta.beta_sum();
    let c0 = theta.omega / one_minus;

    // Gradient of the pre-sample value c_0(θ).
    let mut dc0 = vec![0.0; m];
    dc0[0] = 1.0 / one_minus;
    for j in 0..spec.q {
        dc0[b0 + j] = theta.omega / (one_minus * one_minus);
    }

    let mut v = Vec::with_capacity(n);
    let mut grad = vec![0.0; n * m];
    for t in 0..n {
        let (done, rest) = grad.split_at_mut(t * m);
        let row = &mut rest[..m];
        let mut vt = theta.omega;
        row[0] = 1.0;
        for i in 1..=spec.p.min(t) {
            let xl = x[t - i];
            let x2 = xl * xl;
            let mut a = theta.alpha[i - 1];
            row[a0 + i - 1] = x2;
            if let Some(g0) = g0 {
                if xl < 0.0 {
                    a += theta.gamma[i - 1];
                    row[g0 + i - 1] = x2;
                }
            }
            vt += a * x2;
        }
        for j in 1..=spec.q {
            let bj = theta.beta[j - 1];
            let (lag, lag_grad) = if j <= t {
                (v[t - j], &done[(t - j) * m..(t - j + 1) * m])
            } else {
                (c0, &dc0[..])
            };
            vt += bj * lag;
            row[b0 + j - 1] += lag;
            for (r, g) in row.iter_mut().zip(lag_grad) {
                *r += bj * g;
            }
        }
        if !(vt > 0.0) {
            return Err(Error::NonPositiveVariance { t: t + 1 });
        }
        v.push(vt);
    }
    Ok(VarianceFilter { v, grad, m })
}

/// Standardised residuals `x_t / v̂_t^{1/2}`.
pub fn residuals(theta: &ParamVector, x: &[f64]) -> Result<Vec<f64>> {
    let v = filter_variance(theta, x)?;
    Ok(x.iter().zip(&v).map(|(xt, vt)| xt / vt.sqrt()).collect())
}
