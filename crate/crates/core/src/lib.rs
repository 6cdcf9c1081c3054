//! Rank-based (R-) estimation of GARCH(p,q) and GJR(p,q) volatility models.
//!
//! The crate provides the conditional-variance filter and its gradient, the
//! rank-based one-step estimator with sign, Wilcoxon and van der Waerden scores,
//! Gaussian QMLE and LAD baselines, the weighted bootstrap, path simulation
//! and the Monte Carlo drivers used to study all of the above.

pub mod analysis;
pub mod bootstrap;
pub mod error;
pub mod estimators;
pub mod model;
mod optim;
pub(crate) mod quad;
pub mod rng;
pub mod scores;
pub mod simulate;

pub use bootstrap::{BootstrapConfig, BootstrapRun, SigmaMode, WeightScheme};
pub use error::{Error, Result};
pub use estimators::{Estimator, FitConfig, FitResult, Init};
pub use model::{Family, ModelSpec, ParamVector, Series};
pub use scores::{RankVector, ScoreFunction};
pub use simulate::{InnovationDistribution, SimSpec};
