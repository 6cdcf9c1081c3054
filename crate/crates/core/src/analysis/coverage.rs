//! Bootstrap coverage experiment.

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_distribution, confidence_intervals, BootstrapConfig, WeightScheme};
use crate::error::{Error, Result};
use crate::estimators::{fit_r_estimator, FitConfig};
use crate::model::{ModelSpec, ParamVector};
use crate::rng;
use crate::scores::ScoreFunction;
use crate::simulate::{simulate_stream, InnovationDistribution, SimSpec, DEFAULT_BURNIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageDesign {
    pub theta0: ParamVector,
    pub dist: InnovationDistribution,
    pub n: usize,
    pub replications: usize,
    pub score: ScoreFunction,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub burnin: usize,
    /// Scheme, B, k* and σ_n mode; the seed field is ignored and derived per replication.
    pub bootstrap: BootstrapConfig,
    pub fit: FitConfig,
}

impl CoverageDesign {
    pub fn new(
        theta0: ParamVector,
        dist: InnovationDistribution,
        n: usize,
        replications: usize,
        score: ScoreFunction,
        scheme: WeightScheme,
        b: usize,
        seed: u64,
    ) -> Self {
        Self {
            theta0,
            dist,
            n,
            replications,
            score,
            levels: vec![0.90, 0.95],
            seed,
            burnin: DEFAULT_BURNIN,
            bootstrap: BootstrapConfig {
                scheme,
                replicates: b,
                ..BootstrapConfig::default()
            },
            fit: FitConfig::with_score(score),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    pub param: String,
    pub index: usize,
    pub level: f64,
    pub covered: usize,
    pub total: usize,
    /// Coverage in percent.
    pub percent: f64,
    /// Binomial standard error in percentage points.
    pub se: f64,
    /// Mean interval width.
    pub mean_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub spec: ModelSpec,
    pub scheme: WeightScheme,
    pub score: ScoreFunction,
    pub n: usize,
    pub replications: usize,
    pub replications_used: usize,
    pub failed_replications: usize,
    pub b: usize,
    pub low_b: bool,
    /// Ordered by level, then parameter.
    pub cells: Vec<CoverageCell>,
}

impl CoverageReport {
    pub fn cell(&self, index: usize, level: f64) -> Option<&CoverageCell> {
        self.cells
            .iter()
            .find(|c| c.index == index && (c.level - level).abs() < 1e-12)
    }
}

/// One replication: `(covered flag, width)` per (level, parameter) cell.
fn replication(design: &CoverageDesign, sim: &SimSpec, r: u64) -> Result<Vec<(bool, f64)>> {
    let x = simulate_stream(sim, r)?;
    let fit = fit_r_estimator(&x, &FitConfig { score: design.score, ..design.fit.clone() }, design.theta0.spec())?;
    let cfg = BootstrapConfig {
        seed: rng::derive_seed(design.seed, rng::TAG_AUX, r),
        ..design.bootstrap.clone()
    };
    let run = bootstrap_distribution(&fit, &x, design.score, &cfg)?;
    let truth = design.theta0.to_flat();
    Ok(confidence_intervals(&run, &design.levels)?
        .iter()
        .map(|iv| (iv.contains(truth[iv.index]), iv.upper - iv.lower))
        .collect())
}

/// Per replication: simulate, fit, bootstrap, and record whether each interval covers θ₀.
/// Replications are run in order; the bootstrap inside each is parallel.
pub fn coverage_experiment(design: &CoverageDesign) -> Result<CoverageReport> {
    if design.replications == 0 {
        return Err(Error::InvalidConfig("need at least 1 replication".into()));
    }
    if let Some(l) = design.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::DomainError(*l));
    }
    let sim = SimSpec {
        burnin: design.burnin,
        ..SimSpec::new(design.theta0.clone(), design.n, design.dist, design.seed)
    };
    simulate_stream(&SimSpec { n: 1, burnin: 0, ..sim.clone() }, 0)?;

    let mut results = Vec::with_capacity(design.replications);
    let mut failed = 0;
    for r in 0..design.replications as u64 {
        match replication(design, &sim, r) {
            Ok(v) => results.push(v),
            Err(e @ (Error::InsufficientReplicates { .. } | Error::InvalidConfig(_))) => return Err(e),
            Err(_) => failed += 1,
        }
    }
    if results.is_empty() {
        return Err(Error::AllReplicationsFailed);
    }

    let names = design.theta0.spec().param_names();
    let m = names.len();
    let total = results.len();
    let mut cells = Vec::with_capacity(design.levels.len() * m);
    for (li, &level) in design.levels.iter().enumerate() {
        for (j, name) in names.iter().enumerate() {
            let k = li * m + j;
            let covered = results.iter().filter(|r| r[k].0).count();
            let p = covered as f64 / total as f64;
            cells.push(CoverageCell {
                param: name.clone(),
                index: j,
                level,
                covered,
                total,
                percent: 100.0 * p,
                se: 100.0 * (p * (1.0 - p) / total as f64).sqrt(),
                mean_width: results.iter().map(|r| r[k].1).sum::<f64>() / total as f64,
            });
        }
    }
    Ok(CoverageReport {
        spec: design.theta0.spec(),
        scheme: design.bootstrap.scheme,
        score: design.score,
        n: design.n,
        replications: design.replications,
        replications_used: total,
        failed_replications: failed,
        b: design.bootstrap.replicates,
        low_b: design.bootstrap.replicates < crate::bootstrap::RECOMMENDED_REPLICATES,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_b_is_flagged_and_bounded() {
        let d = CoverageDesign::new(
            ParamVector::garch11(6.5e-6, 0.177, 0.716),
            InnovationDistribution::Normal,
            300,
            3,
            ScoreFunction::Sign,
            WeightScheme::U,
            20,
            5,
        );
        let r = coverage_experiment(&d).unwrap();
        assert!(r.low_b);
        assert!(r.cells.iter().all(|c| (0.0..=100.0).contains(&c.percent)));
        for j in 0..3 {
            assert!(r.cell(j, 0.95).unwrap().covered >= r.cell(j, 0.90).unwrap().covered);
        }
    }
}
