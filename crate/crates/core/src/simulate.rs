//! Standardized innovation families and GARCH/GJR path simulation.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::model::{Family, ParamVector, Series};
use crate::quad::{integrate, QuadConfig};
use crate::rng::{self, Rng};

/// Default burn-in discarded before the returned path.
pub const DEFAULT_BURNIN: usize = 500;
/// Default skew-normal shape.
pub const DEFAULT_SKEW_SHAPE: f64 = 5.0;

/// Innovation law, always standardized to mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InnovationDistribution {
    Normal,
    /// Laplace with scale 1/√2.
    DoubleExponential,
    /// Logistic with scale √3/π.
    Logistic,
    /// Student t with `df > 2` degrees of freedom, divided by its standard deviation.
    StudentT(f64),
    /// Azzalini skew normal with the given shape, centred and scaled.
    SkewNormal(f64),
}

impl fmt::Display for InnovationDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Normal => f.write_str("normal"),
            Self::DoubleExponential => f.write_str("de"),
            Self::Logistic => f.write_str("logistic"),
            Self::StudentT(df) => write!(f, "t({df})"),
            Self::SkewNormal(a) => write!(f, "skewnormal({a})"),
        }
    }
}

const LOGISTIC_SCALE: f64 = 0.551_328_895_421_792_1; // √3/π

fn std_normal() -> Normal {
    Normal::standard()
}

impl InnovationDistribution {
    /// Builds a distribution from a family name plus optional `df`/`shape`.
    pub fn from_parts(name: &str, df: Option<f64>, shape: Option<f64>) -> Result<Self> {
        let d = match name.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Self::Normal,
            "de" | "laplace" | "double-exponential" => Self::DoubleExponential,
            "logistic" => Self::Logistic,
            "t" | "student" | "student-t" => Self::StudentT(
                df.ok_or_else(|| Error::InvalidConfig("student-t requires df".into()))?,
            ),
            "skewnormal" | "skew-normal" | "sn" => Self::SkewNormal(shape.unwrap_or(DEFAULT_SKEW_SHAPE)),
            other => return Err(Error::InvalidConfig(format!("unknown distribution '{other}'"))),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::StudentT(df) if !(df > 2.0) || df.is_nan() => Err(Error::InvalidDf(df)),
            Self::SkewNormal(a) if !a.is_finite() => {
                Err(Error::InvalidConfig(format!("skew-normal shape must be finite, got {a}")))
            }
            _ => Ok(()),
        }
    }

    fn t_scale(df: f64) -> f64 {
        ((df - 2.0) / df).sqrt()
    }

    /// `(δ, μ, σ)` of the skew normal before standardization.
    fn skew_params(a: f64) -> (f64, f64, f64) {
        let delta = a / (1.0 + a * a).sqrt();
        let mu = delta * (2.0 / PI).sqrt();
        let sigma = (1.0 - 2.0 * delta * delta / PI).sqrt();
        (delta, mu, sigma)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal => std_normal().pdf(x),
            Self::DoubleExponential => FRAC_1_SQRT_2 * (-(2.0f64.sqrt()) * x.abs()).exp(),
            Self::Logistic => {
                let z = (-(x.abs()) / LOGISTIC_SCALE).exp();
                z / (LOGISTIC_SCALE * (1.0 + z) * (1.0 + z))
            }
            Self::StudentT(df) => {
                let k = Self::t_scale(df);
                StudentsT::new(0.0, 1.0, df).expect("validated df").pdf(x / k) / k
            }
            Self::SkewNormal(a) => {
                let (_, mu, sigma) = Self::skew_params(a);
                let z = mu + sigma * x;
                let n = std_normal();
                2.0 * sigma * n.pdf(z) * n.cdf(a * z)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal => std_normal().cdf(x),
            Self::DoubleExponential => {
                let e = 0.5 * (-(2.0f64.sqrt()) * x.abs()).exp();
                if x < 0.0 {
                    e
                } else {
                    1.0 - e
                }
            }
            Self::Logistic => 1.0 / (1.0 + (-x / LOGISTIC_SCALE).exp()),
            Self::StudentT(df) => StudentsT::new(0.0, 1.0, df)
                .expect("validated df")
                .cdf(x / Self::t_scale(df)),
            Self::SkewNormal(a) => {
                let (_, mu, sigma) = Self::skew_params(a);
                let z = mu + sigma * x;
                (std_normal().cdf(z) - 2.0 * owens_t(z, a)).clamp(0.0, 1.0)
            }
        }
    }

    /// Quantile function; closed form where available, bisection otherwise.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::DomainError(u));
        }
        Ok(match *self {
            Self::Normal => std_normal().inverse_cdf(u),
            Self::DoubleExponential => {
                let b = FRAC_1_SQRT_2;
                if u < 0.5 {
                    b * (2.0 * u).ln()
                } else {
                    -b * (2.0 * (1.0 - u)).ln()
                }
            }
            Self::Logistic => LOGISTIC_SCALE * (u / (1.0 - u)).ln(),
            Self::StudentT(df) => {
                Self::t_scale(df) * StudentsT::new(0.0, 1.0, df).expect("validated df").inverse_cdf(u)
            }
            Self::SkewNormal(_) => {
                let (mut lo, mut hi) = (-1.0, 1.0);
                while self.cdf(lo) > u {
                    lo *= 2.0;
                }
                while self.cdf(hi) < u {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * mid.abs().max(1.0) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        })
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is interior")
    }

    /// `E ε⁴` of the standardized law.
    pub fn fourth_moment(&self) -> Result<f64> {
        match *self {
            Self::Normal => Ok(3.0),
            Self::DoubleExponential => Ok(6.0),
            Self::Logistic => Ok(4.2),
            Self::StudentT(df) if df > 4.0 => Ok(3.0 + 6.0 / (df - 4.0)),
            Self::StudentT(_) => Err(Error::InfiniteFourthMoment),
            Self::SkewNormal(a) => {
                let (delta, _, _) = Self::skew_params(a);
                let b = delta * (2.0 / PI).sqrt();
                Ok(3.0 + 2.0 * (PI - 3.0) * b.powi(4) / (1.0 - 2.0 * delta * delta / PI).powi(2))
            }
        }
    }

    /// Points where the density is not smooth (for quadrature).
    pub(crate) fn kinks(&self) -> Vec<f64> {
        match self {
            Self::DoubleExponential => vec![0.0],
            _ => Vec::new(),
        }
    }
}

/// Owen's T function `T(h, a) = (2π)⁻¹ ∫₀ᵃ exp(−h²(1+x²)/2)/(1+x²) dx`.
pub fn owens_t(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let cfg = QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        ..QuadConfig::default()
    };
    let r = integrate(
        |x| {
            let s = 1.0 + x * x;
            (-0.5 * h * h * s).exp() / s
        },
        0.0,
        a,
        &cfg,
    );
    r.value / (2.0 * PI)
}

/// One standardized draw.
pub fn sample_innovation(dist: &InnovationDistribution, rng: &mut Rng) -> Result<f64> {
    dist.validate()?;
    Ok(draw(dist, rng))
}

fn draw(dist: &InnovationDistribution, rng: &mut Rng) -> f64 {
    match *dist {
        InnovationDistribution::Normal => rng.sample(StandardNormal),
        InnovationDistribution::DoubleExponential => {
            let u: f64 = rng.random();
            let u = u.max(f64::MIN_POSITIVE);
            dist.quantile(u).unwrap_or(0.0)
        }
        InnovationDistribution::Logistic => {
            let u: f64 = rng.random();
            let u = u.max(f64::MIN_POSITIVE);
            LOGISTIC_SCALE * (u / (1.0 - u)).ln()
        }
        InnovationDistribution::StudentT(df) => {
            let t: f64 = StudentT::new(df).expect("validated df").sample(rng);
            t * InnovationDistribution::t_scale(df)
        }
        InnovationDistribution::SkewNormal(a) => {
            let (delta, mu, sigma) = InnovationDistribution::skew_params(a);
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            let sn = delta * z0.abs() + (1.0 - delta * delta).sqrt() * z1;
            (sn - mu) / sigma
        }
    }
}

/// Everything needed to generate one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub theta0: ParamVector,
    pub n: usize,
    pub burnin: usize,
    pub dist: InnovationDistribution,
    pub seed: u64,
    /// Simulate even when the persistence is at least one.
    pub allow_nonstationary: bool,
}

impl SimSpec {
    pub fn new(theta0: ParamVector, n: usize, dist: InnovationDistribution, seed: u64) -> Self {
        Self {
            theta0,
            n,
            burnin: DEFAULT_BURNIN,
            dist,
            seed,
            allow_nonstationary: false,
        }
    }
}

fn check_sim_params(spec: &SimSpec) -> Result<()> {
    let theta = &spec.theta0;
    let names = theta.spec().param_names();
    for (k, v) in theta.to_flat().into_iter().enumerate() {
        let ok = if k == 0 { v > 0.0 } else { v >= 0.0 };
        if !ok || !v.is_finite() {
            return Err(Error::NonPositiveParameter {
                name: names[k].clone(),
                value: v,
            });
        }
    }
    if spec.n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    spec.dist.validate()?;
    if !spec.allow_nonstationary && theta.persistence() >= 1.0 {
        return Err(Error::NonStationary {
            persistence: theta.persistence(),
        });
    }
    Ok(())
}

/// Simulates a path from `spec` on replication stream `index`.
pub fn simulate_stream(spec: &SimSpec, index: u64) -> Result<Series> {
    check_sim_params(spec)?;
    let theta = &spec.theta0;
    let (p, q) = (theta.spec().p, theta.spec().q);
    let mut rng = rng::stream(spec.seed, rng::TAG_SIMULATE, index);
    let start = theta.unconditional_variance().unwrap_or(theta.omega);

    // Ring buffers of the last p squared returns (with their sign) and q variances.
    let mut x2 = vec![start; p];
    let mut neg = vec![0.5; p];
    let mut s2 = vec![start; q];
    let total = spec.burnin + spec.n;
    let mut out = Vec::with_capacity(spec.n);
    for t in 0..total {
        let mut v = theta.omega;
        for i in 0..p {
            let g = theta.gamma.get(i).copied().unwrap_or(0.0);
            let k = (t + p - 1 - i) % p;
            v += (theta.alpha[i] + g * neg[k]) * x2[k];
        }
        for j in 0..q {
            v += theta.beta[j] * s2[(t + q - 1 - j) % q];
        }
        let x = v.sqrt() * draw(&spec.dist, &mut rng);
        x2[t % p] = x * x;
        neg[t % p] = if x < 0.0 { 1.0 } else { 0.0 };
        s2[t % q] = v;
        if t >= spec.burnin {
            out.push(x);
        }
    }
    Series::new(out)
}

/// Simulates a GARCH path (stream 0 of `spec.seed`).
pub fn simulate_garch(spec: &SimSpec) -> Result<Series> {
    if spec.theta0.spec().family != Family::Garch {
        return Err(Error::UnsupportedSpec(format!(
            "expected garch parameters, got {}",
            spec.theta0.spec()
        )));
    }
    simulate_stream(spec, 0)
}

/// Simulates a GJR path (stream 0 of `spec.seed`).
pub fn simulate_gjr(spec: &SimSpec) -> Result<Series> {
    if spec.theta0.spec().family != Family::Gjr {
        return Err(Error::UnsupportedSpec(format!(
            "expected gjr parameters, got {}",
            spec.theta0.spec()
        )));
    }
    simulate_stream(spec, 0)
}
