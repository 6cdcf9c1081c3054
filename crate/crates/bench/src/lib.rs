//! Shared fixtures for the benchmarks in `benches/`.

use rank_garch::simulate::simulate_stream;
use rank_garch::{InnovationDistribution, ParamVector, SimSpec};

pub fn theta0() -> ParamVector {
    ParamVector::garch11(6.5e-6, 0.177, 0.716)
}

/// A simulated normal GARCH(1,1) path of length `n`.
pub fn path(n: usize) -> Vec<f64> {
    simulate_stream(&SimSpec::new(theta0(), n, InnovationDistribution::Normal, 1), 0)
        .expect("valid design")
        .into_inner()
}
