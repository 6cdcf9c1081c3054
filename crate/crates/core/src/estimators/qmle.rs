//! Gaussian quasi-maximum likelihood.

use super::{check_length, from_unconstrained, moment_start, to_unconstrained, Estimator, FitResult};
use crate::error::Result;
use crate::model::{filter_variance, filter_variance_gradient, ModelSpec, ParamVector};
use crate::optim::{bfgs, BfgsOptions};

/// `n⁻¹ Σ [log v̂_t + x²_t / v̂_t]`.
pub fn qmle_objective(theta: &ParamVector, x: &[f64]) -> Result<f64> {
    let v = filter_variance(theta, x)?;
    let s: f64 = x.iter().zip(&v).map(|(xt, vt)| vt.ln() + xt * xt / vt).sum();
    Ok(s / x.len() as f64)
}

/// Objective and gradient in θ-space.
fn objective_and_gradient(theta: &ParamVector, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let filt = filter_variance_gradient(theta, x)?;
    let m = filt.dim();
    let n = x.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; m];
    for (t, xt) in x.iter().enumerate() {
        let vt = filt.v[t];
        let r = xt * xt / vt;
        value += vt.ln() + r;
        let c = (1.0 - r) / vt;
        for (g, d) in grad.iter_mut().zip(filt.grad_row(t)) {
            *g += c * d;
        }
    }
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((value / n, grad))
}

/// Minimises the quasi-likelihood by BFGS over log/logit-transformed parameters.
///
/// Optimizer failure is reported through `converged = false`, not as an error,
/// so that Monte Carlo drivers can count it.
pub fn fit_qmle(x: &[f64], spec: ModelSpec, init: Option<&ParamVector>) -> Result<FitResult> {
    check_length(x, spec)?;
    let start = match init {
        Some(t) if t.spec() == spec && t.validate(false).is_ok() => t.clone(),
        _ => moment_start(x, spec)?,
    };
    let u0 = to_unconstrained(&start);
    let f = |u: &[f64]| {
        let (theta, jac) = from_unconstrained(u, spec)?;
        let (v, g) = objective_and_gradient(&theta, x).ok()?;
        Some((v, g.iter().zip(&jac).map(|(a, b)| a * b).collect()))
    };
    let out = bfgs(f, &u0, &BfgsOptions::default());
    let theta = from_unconstrained(&out.x, spec).map_or(start, |(t, _)| t);
    Ok(FitResult {
        estimator: Estimator::Qmle,
        theta_phi: theta.clone(),
        c_hat: 1.0,
        theta,
        iterations_used: out.iterations,
        converged: out.converged,
        step_norms: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let theta = ParamVector::gjr11(0.2, 0.1, 0.15, 0.6);
        let x: Vec<f64> = (0..40).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let (_, g) = objective_and_gradient(&theta, &x).unwrap();
        let flat = theta.to_flat();
        for k in 0..flat.len() {
            let h = 1e-6 * flat[k];
            let mut up = flat.clone();
            let mut dn = flat.clone();
            up[k] += h;
            dn[k] -= h;
            let fu = qmle_objective(&ParamVector::from_flat(theta.spec(), &up).unwrap(), &x).unwrap();
            let fd = qmle_objective(&ParamVector::from_flat(theta.spec(), &dn).unwrap(), &x).unwrap();
            let fdg = (fu - fd) / (2.0 * h);
            assert!((fdg - g[k]).abs() <= 1e-5 * g[k].abs().max(1e-3), "k={k}: {fdg} vs {}", g[k]);
        }
    }

    #[test]
    fn toy_objective_matches_direct_sum() {
        let theta = ParamVector::garch11(0.1, 0.2, 0.5);
        let x = [1.0, -1.0, 2.0, -0.5, 1.0];
        let c0 = 0.1 / 0.5;
        let mut v = [0.0f64; 5];
        v[0] = 0.1 + 0.5 * c0;
        for t in 1..5 {
            v[t] = 0.1 + 0.2 * x[t - 1] * x[t - 1] + 0.5 * v[t - 1];
        }
        let direct: f64 = (0..5).map(|t| v[t].ln() + x[t] * x[t] / v[t]).sum::<f64>() / 5.0;
        assert!((qmle_objective(&theta, &x).unwrap() - direct).abs() < 1e-14);
    }
}
