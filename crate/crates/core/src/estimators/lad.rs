//! Least absolute deviations M-estimator: the Laplace quasi-likelihood, whose
//! estimating equation is `Σ (v̇/v)(1 − |ε_t|) = 0`.
//!
//! It identifies the parameter up to the factor `(E|ε|)²`, the same constant as
//! the sign score, and is rescaled by `ĉ` like the R-estimators.

use super::{
    check_length, estimate_scale_c, from_unconstrained, moment_start, rescale, to_unconstrained,
    Estimator, FitResult,
};
use crate::error::{Error, Result};
use crate::model::{filter_variance, filter_variance_gradient, mean_square, ModelSpec, ParamVector};
use crate::optim::{bfgs, BfgsOptions};

/// `n⁻¹ Σ [½ log v̂_t + |x_t| / v̂_t^{1/2}]`.
pub fn lad_objective(theta: &ParamVector, x: &[f64]) -> Result<f64> {
    let v = filter_variance(theta, x)?;
    let s: f64 = x
        .iter()
        .zip(&v)
        .map(|(xt, vt)| 0.5 * vt.ln() + xt.abs() / vt.sqrt())
        .sum();
    Ok(s / x.len() as f64)
}

fn objective_and_gradient(theta: &ParamVector, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let filt = filter_variance_gradient(theta, x)?;
    let n = x.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; filt.dim()];
    for (t, xt) in x.iter().enumerate() {
        let vt = filt.v[t];
        let e = xt.abs() / vt.sqrt();
        value += 0.5 * vt.ln() + e;
        let c = 0.5 * (1.0 - e) / vt;
        for (g, d) in grad.iter_mut().zip(filt.grad_row(t)) {
            *g += c * d;
        }
    }
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((value / n, grad))
}

/// BFGS on the log/logit scale, then rescaling by `ĉ`.
pub fn fit_lad(x: &[f64], spec: ModelSpec, init: Option<&ParamVector>) -> Result<FitResult> {
    check_length(x, spec)?;
    if !(mean_square(x) > 0.0) {
        return Err(Error::DegenerateSeries);
    }
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
    let theta_phi = from_unconstrained(&out.x, spec)
        .map(|(t, _)| t)
        .ok_or_else(|| Error::OptimFailed("LAD search left the parameter space".into()))?;
    let c_hat = estimate_scale_c(&theta_phi, x)?;
    Ok(FitResult {
        estimator: Estimator::Lad,
        theta: rescale(&theta_phi, c_hat),
        theta_phi,
        c_hat,
        iterations_used: out.iterations,
        converged: out.converged,
        step_norms: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_objective_matches_direct_sum() {
        let theta = ParamVector::garch11(0.1, 0.2, 0.5);
        let x: [f64; 5] = [1.0, -1.0, 2.0, 0.0, 1.0];
        let mut v = [0.0f64; 5];
        v[0] = 0.1 + 0.5 * 0.2;
        for t in 1..5 {
            v[t] = 0.1 + 0.2 * x[t - 1] * x[t - 1] + 0.5 * v[t - 1];
        }
        let direct: f64 = (0..5).map(|t| 0.5 * v[t].ln() + x[t].abs() / v[t].sqrt()).sum::<f64>() / 5.0;
        assert!((lad_objective(&theta, &x).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let theta = ParamVector::garch11(0.2, 0.1, 0.6);
        let x: Vec<f64> = (0..40).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let (_, g) = objective_and_gradient(&theta, &x).unwrap();
        let flat = theta.to_flat();
        for k in 0..flat.len() {
            let h = 1e-6 * flat[k];
            let mut up = flat.clone();
            let mut dn = flat.clone();
            up[k] += h;
            dn[k] -= h;
            let fu = lad_objective(&ParamVector::from_flat(theta.spec(), &up).unwrap(), &x).unwrap();
            let fd = lad_objective(&ParamVector::from_flat(theta.spec(), &dn).unwrap(), &x).unwrap();
            let num = (fu - fd) / (2.0 * h);
            assert!((num - g[k]).abs() < 1e-6 * (1.0 + g[k].abs()), "slot {k}: {num} vs {}", g[k]);
        }
    }

    #[test]
    fn all_zero_series_is_degenerate() {
        assert_eq!(
            fit_lad(&[0.0; 10], ModelSpec::garch(1, 1), None).unwrap_err(),
            Error::DegenerateSeries
        );
    }
}
