//! Score functionals c_φ, σ²(φ), ρ(φ), γ(φ), λ(φ) by numerical integration,
//! and the closed-form ARE of the sign estimator against QMLE.
//!
//! All integrals are written in the innovation scale `x` (density `f`, CDF `F`).
//! With `η = ε/√c_φ` and `u = F(x)` the Stieltjes measure `G⁻¹(u) dφ(u)` becomes
//! `h(x) dx` with `h(x) = (x/√c) φ'(F(x)) f(x)` plus a point mass `2·m/√c` at
//! the median `m` for the sign score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_checked, RunningIntegral};
use crate::scores::ScoreFunction;
use crate::simulate::InnovationDistribution;

pub use crate::quad::QuadConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreFunctionals {
    pub c_phi: f64,
    pub gamma_phi: f64,
    pub lambda_phi: f64,
    pub rho_phi: f64,
    pub sigma2_phi: f64,
}

const NEG_INF: f64 = f64::NEG_INFINITY;
const INF: f64 = f64::INFINITY;

struct Setup<'a> {
    dist: &'a InnovationDistribution,
    score: ScoreFunction,
    sc: f64,
    breaks: Vec<f64>,
    /// `(location, point weight)` of the atoms of `G⁻¹ dφ`, with `F(location)`.
    atoms: Vec<(f64, f64, f64)>,
}

impl Setup<'_> {
    fn h(&self, x: f64) -> f64 {
        let u = self.dist.cdf(x);
        if !(u > 0.0 && u < 1.0) {
            return 0.0;
        }
        x / self.sc * self.score.density(u) * self.dist.pdf(x)
    }

    /// `1 − (x/√c) φ(F(x))`, the centred efficient-score direction.
    fn centred(&self, x: f64) -> f64 {
        let u = self.dist.cdf(x).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        1.0 - x / self.sc * self.score.eval_unchecked(u)
    }

    fn has_continuous_part(&self) -> bool {
        self.score != ScoreFunction::Sign
    }
}

/// Evaluates all five functionals for `score` under the standardized `dist`.
pub fn score_functionals(
    dist: &InnovationDistribution,
    score: ScoreFunction,
    quad: &QuadConfig,
) -> Result<ScoreFunctionals> {
    dist.validate()?;
    let f = |x: f64| dist.pdf(x);
    let phi_f = |x: f64| {
        let u = dist.cdf(x);
        if u > 0.0 && u < 1.0 {
            score.eval_unchecked(u)
        } else if u <= 0.0 {
            score.eval_unchecked(f64::MIN_POSITIVE)
        } else {
            score.eval_unchecked(1.0 - f64::EPSILON / 2.0)
        }
    };
    let mut breaks = dist.kinks();
    let median = dist.median();
    if score == ScoreFunction::Sign {
        breaks.push(median);
    }

    let root_c = integrate_checked(|x| phi_f(x) * x * f(x), NEG_INF, INF, &breaks, quad)?;
    if !(root_c > 0.0) {
        return Err(Error::QuadratureNotConverged(root_c.abs()));
    }
    let c = root_c * root_c;
    let sc = root_c;

    let second = integrate_checked(|x| (phi_f(x) * x).powi(2) * f(x), NEG_INF, INF, &breaks, quad)?;
    let sigma2 = (second / c - 1.0).max(0.0);

    let atoms: Vec<(f64, f64, f64)> = score
        .atoms()
        .iter()
        .map(|&(u, mass)| {
            let x = dist.quantile(u).expect("atoms lie inside (0,1)");
            (x, mass * x / sc, u)
        })
        .collect();
    let st = Setup {
        dist,
        score,
        sc,
        breaks: breaks.clone(),
        atoms,
    };

    let mut rho: f64 = score
        .atoms()
        .iter()
        .zip(&st.atoms)
        .map(|(&(_, mass), &(x, _, _))| mass * x * x * dist.pdf(x) / sc)
        .sum();
    if st.has_continuous_part() {
        rho += integrate_checked(
            |x| {
                let u = dist.cdf(x);
                if !(u > 0.0 && u < 1.0) {
                    return 0.0;
                }
                x * x * f(x) * f(x) * score.density(u)
            },
            NEG_INF,
            INF,
            &breaks,
            quad,
        )? / sc;
    }

    let gamma = gamma_functional(&st, quad)?;
    let lambda = lambda_functional(&st, quad)?;
    Ok(ScoreFunctionals {
        c_phi: c,
        gamma_phi: gamma,
        lambda_phi: lambda,
        rho_phi: rho,
        sigma2_phi: sigma2,
    })
}

/// `γ = ∫∫ k(s)k(t)(min(s,t) − st) dμ(s)dμ(t)` split into continuous and atomic parts.
fn gamma_functional(st: &Setup, quad: &QuadConfig) -> Result<f64> {
    let inner = QuadConfig {
        fail_above: INF,
        ..*quad
    };
    let mut total = 0.0;
    if st.has_continuous_part() {
        // 2 ∫ h(y)(1 − F(y)) [∫_{−∞}^y h(x)F(x) dx] dy
        let low = RunningIntegral::new(|x| st.h(x) * st.dist.cdf(x), &st.breaks, &inner);
        total += 2.0
            * integrate_checked(
                |y| {
                    let hy = st.h(y);
                    if hy == 0.0 {
                        return 0.0;
                    }
                    hy * (1.0 - st.dist.cdf(y)) * low.at(y)
                },
                NEG_INF,
                INF,
                &st.breaks,
                quad,
            )?;
    }
    for &(xa, wa, ua) in &st.atoms {
        total += wa * wa * ua * (1.0 - ua);
        if st.has_continuous_part() && wa != 0.0 {
            let below = integrate_checked(|x| st.h(x) * st.dist.cdf(x), NEG_INF, xa, &[], quad)?;
            let above = integrate_checked(|y| st.h(y) * (1.0 - st.dist.cdf(y)), xa, INF, &[], quad)?;
            total += 2.0 * wa * ((1.0 - ua) * below + ua * above);
        }
    }
    Ok(total)
}

/// `λ = ∫ h(x) K(x) dx + Σ_atoms w·K(x_a)` with `K(x) = ∫_{−∞}^x (1 − (t/√c)φ(F(t))) f(t) dt`.
fn lambda_functional(st: &Setup, quad: &QuadConfig) -> Result<f64> {
    let inner = QuadConfig {
        fail_above: INF,
        ..*quad
    };
    let running = RunningIntegral::new(|t| st.centred(t) * st.dist.pdf(t), &st.breaks, &inner);
    let k = |x: f64| running.at(x);
    let mut total = 0.0;
    if st.has_continuous_part() {
        total += integrate_checked(
            |x| {
                let hx = st.h(x);
                if hx == 0.0 {
                    0.0
                } else {
                    hx * k(x)
                }
            },
            NEG_INF,
            INF,
            &st.breaks,
            quad,
        )?;
    }
    for &(xa, wa, _) in &st.atoms {
        if wa != 0.0 {
            total += wa * k(xa);
        }
    }
    Ok(total)
}

/// `(E ε⁴ − 1) / (4 σ²(φ_sign))`.
pub fn are_sign_vs_qmle(dist: &InnovationDistribution) -> Result<f64> {
    let m4 = dist.fourth_moment()?;
    let fx = score_functionals(dist, ScoreFunction::Sign, &QuadConfig::default())?;
    Ok((m4 - 1.0) / (4.0 * fx.sigma2_phi))
}
