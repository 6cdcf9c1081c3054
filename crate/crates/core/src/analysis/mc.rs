//! Monte Carlo study of bias, MSE and efficiency relative to QMLE.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{fit_lad, fit_qmle, fit_r_estimator, Estimator, FitConfig, FitResult, Init};
use crate::model::{ModelSpec, ParamVector};
use crate::simulate::{simulate_stream, InnovationDistribution, SimSpec, DEFAULT_BURNIN};

/// Studies with fewer usable replications than this are flagged.
pub const LOW_REPLICATIONS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDesign {
    pub theta0: ParamVector,
    pub dist: InnovationDistribution,
    pub n: usize,
    pub replications: usize,
    pub estimators: Vec<Estimator>,
    pub seed: u64,
    pub burnin: usize,
    /// Iteration settings for the R-estimators (score and init are overridden).
    pub fit: FitConfig,
}

impl McDesign {
    pub fn new(
        theta0: ParamVector,
        dist: InnovationDistribution,
        n: usize,
        replications: usize,
        estimators: Vec<Estimator>,
        seed: u64,
    ) -> Self {
        Self {
            theta0,
            dist,
            n,
            replications,
            estimators,
            seed,
            burnin: DEFAULT_BURNIN,
            fit: FitConfig::default(),
        }
    }

    pub fn sim_spec(&self) -> SimSpec {
        SimSpec {
            burnin: self.burnin,
            ..SimSpec::new(self.theta0.clone(), self.n, self.dist, self.seed)
        }
    }
}

/// Per-estimator summary over the common replication set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: Estimator,
    pub bias: Vec<f64>,
    pub bias_se: Vec<f64>,
    pub mse: Vec<f64>,
    pub mse_se: Vec<f64>,
    /// `MSE_QMLE / MSE_estimator`.
    pub are: Vec<f64>,
    /// Delta-method standard error of `are`.
    pub are_se: Vec<f64>,
    /// Replications on which this estimator returned an error.
    pub failures: usize,
    /// Replications on which it returned a result flagged as not converged.
    pub not_converged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStudyReport {
    pub spec: ModelSpec,
    pub param_names: Vec<String>,
    pub theta0: Vec<f64>,
    pub n: usize,
    pub replications: usize,
    pub replications_used: usize,
    pub qmle_failures: usize,
    pub low_replications: bool,
    pub estimators: Vec<EstimatorSummary>,
    /// Squared errors per used replication, indexed `[estimator][replication][param]`,
    /// with QMLE's own errors last; kept so efficiencies can be recomputed pairwise.
    pub squared_errors: Vec<Vec<Vec<f64>>>,
}

impl McStudyReport {
    pub fn summary(&self, e: Estimator) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|s| s.estimator == e)
    }

    /// `MSE_b / MSE_a` per parameter: the efficiency of `a` relative to `b`
    /// on the common replication set.
    pub fn relative_efficiency(&self, a: Estimator, b: Estimator) -> Option<Vec<f64>> {
        let ia = self.estimators.iter().position(|s| s.estimator == a)?;
        let ib = self.estimators.iter().position(|s| s.estimator == b)?;
        Some(
            self.estimators[ia]
                .mse
                .iter()
                .zip(&self.estimators[ib].mse)
                .map(|(ma, mb)| mb / ma)
                .collect(),
        )
    }
}

struct Replication {
    qmle_ok: bool,
    /// Per requested estimator: flat estimate, or `None` on error; plus its convergence flag.
    fits: Vec<Option<(Vec<f64>, bool)>>,
    qmle: Option<Vec<f64>>,
}

fn run_replication(design: &McDesign, sim: &SimSpec, index: u64) -> Result<Replication> {
    let x = simulate_stream(sim, index)?;
    let spec = design.theta0.spec();
    let qmle = fit_qmle(&x, spec, None).ok();
    let qmle_ok = qmle.as_ref().is_some_and(|f| f.converged);
    let init = match &qmle {
        Some(f) if f.converged => Init::UserSupplied(f.theta.clone()),
        _ => Init::Lad,
    };
    let flat = |r: Result<FitResult>| r.ok().map(|f| (f.theta.to_flat(), f.converged));
    let fits = design
        .estimators
        .iter()
        .map(|e| match e {
            Estimator::Qmle => qmle.as_ref().map(|f| (f.theta.to_flat(), f.converged)),
            Estimator::Lad => flat(fit_lad(&x, spec, None)),
            Estimator::Rank(score) => flat(fit_r_estimator(
                &x,
                &FitConfig {
                    score: *score,
                    init: init.clone(),
                    ..design.fit.clone()
                },
                spec,
            )),
        })
        .collect();
    Ok(Replication {
        qmle_ok,
        fits,
        qmle: qmle.map(|f| f.theta.to_flat()),
    })
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Delta-method standard error of `mean(a)/mean(b)` for paired samples.
fn ratio_se(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    if a.len() < 2 {
        return f64::NAN;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut vaa, mut vbb, mut vab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        vaa += (x - ma).powi(2);
        vbb += (y - mb).powi(2);
        vab += (x - ma) * (y - mb);
    }
    let d = n - 1.0;
    let (vaa, vbb, vab) = (vaa / d, vbb / d, vab / d);
    let r = ma / mb;
    let var = (vaa - 2.0 * r * vab + r * r * vbb) / (mb * mb * n);
    var.max(0.0).sqrt()
}

/// Simulates `R` paths, fits every estimator, and aggregates on the replications
/// where QMLE converged and every requested estimator returned a result.
pub fn mc_study(design: &McDesign) -> Result<McStudyReport> {
    if design.replications < 2 {
        return Err(Error::InvalidConfig("need at least 2 replications".into()));
    }
    if design.estimators.is_empty() {
        return Err(Error::InvalidConfig("no estimators requested".into()));
    }
    design.fit.validate()?;
    let sim = design.sim_spec();
    // Surface configuration errors once instead of R times.
    simulate_stream(&SimSpec { n: 1, burnin: 0, ..sim.clone() }, 0)?;
    if design.n <= design.theta0.dim() {
        return Err(Error::InsufficientData {
            n: design.n,
            m: design.theta0.dim(),
        });
    }

    let reps: Vec<Result<Replication>> = (0..design.replications as u64)
        .into_par_iter()
        .map(|i| run_replication(design, &sim, i))
        .collect();
    let reps: Vec<Replication> = reps.into_iter().collect::<Result<_>>()?;

    let k = design.estimators.len();
    let mut failures = vec![0; k];
    let mut not_converged = vec![0; k];
    for r in &reps {
        for (j, f) in r.fits.iter().enumerate() {
            match f {
                None => failures[j] += 1,
                Some((_, false)) => not_converged[j] += 1,
                _ => {}
            }
        }
    }
    let qmle_failures = reps.iter().filter(|r| !r.qmle_ok).count();
    let used: Vec<&Replication> = reps
        .iter()
        .filter(|r| r.qmle_ok && r.fits.iter().all(Option::is_some))
        .collect();
    if used.is_empty() {
        return Err(Error::AllReplicationsFailed);
    }

    let theta0 = design.theta0.to_flat();
    let m = theta0.len();
    let errors_of = |flat: &[f64]| -> Vec<f64> { flat.iter().zip(&theta0).map(|(a, b)| a - b).collect() };
    // [estimator][replication][param], QMLE appended as the baseline.
    let mut errs: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|j| {
            used.iter()
                .map(|r| errors_of(&r.fits[j].as_ref().expect("filtered").0))
                .collect()
        })
        .collect();
    errs.push(
        used.iter()
            .map(|r| errors_of(r.qmle.as_ref().expect("qmle converged")))
            .collect(),
    );
    let sq: Vec<Vec<Vec<f64>>> = errs
        .iter()
        .map(|e| e.iter().map(|row| row.iter().map(|v| v * v).collect()).collect())
        .collect();
    let column = |table: &Vec<Vec<f64>>, p: usize| -> Vec<f64> { table.iter().map(|row| row[p]).collect() };

    let estimators = (0..k)
        .map(|j| {
            let mut s = EstimatorSummary {
                estimator: design.estimators[j],
                bias: Vec::with_capacity(m),
                bias_se: Vec::with_capacity(m),
                mse: Vec::with_capacity(m),
                mse_se: Vec::with_capacity(m),
                are: Vec::with_capacity(m),
                are_se: Vec::with_capacity(m),
                failures: failures[j],
                not_converged: not_converged[j],
            };
            for p in 0..m {
                let (b, bse) = mean_and_se(&column(&errs[j], p));
                let own = column(&sq[j], p);
                let base = column(&sq[k], p);
                let (mse, mse_se) = mean_and_se(&own);
                let (mse_q, _) = mean_and_se(&base);
                s.bias.push(b);
                s.bias_se.push(bse);
                s.mse.push(mse);
                s.mse_se.push(mse_se);
                s.are.push(mse_q / mse);
                s.are_se.push(ratio_se(&base, &own));
            }
            s
        })
        .collect();

    Ok(McStudyReport {
        spec: design.theta0.spec(),
        param_names: design.theta0.spec().param_names(),
        theta0,
        n: design.n,
        replications: design.replications,
        replications_used: used.len(),
        qmle_failures,
        low_replications: used.len() < LOW_REPLICATIONS,
        estimators,
        squared_errors: sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::ScoreFunction;

    fn small_design(estimators: Vec<Estimator>) -> McDesign {
        McDesign::new(
            ParamVector::garch11(6.5e-6, 0.177, 0.716),
            InnovationDistribution::Normal,
            300,
            4,
            estimators,
            42,
        )
    }

    #[test]
    fn qmle_only_has_unit_efficiency() {
        let r = mc_study(&small_design(vec![Estimator::Qmle])).unwrap();
        assert!(r.estimators[0].are.iter().all(|a| (*a - 1.0).abs() < 1e-15));
        assert!(r.low_replications);
    }

    #[test]
    fn efficiency_is_antisymmetric() {
        let a = Estimator::Rank(ScoreFunction::Vdw);
        let b = Estimator::Lad;
        let r = mc_study(&small_design(vec![a, b])).unwrap();
        let ab = r.relative_efficiency(a, b).unwrap();
        let ba = r.relative_efficiency(b, a).unwrap();
        for (x, y) in ab.iter().zip(&ba) {
            assert!((x * y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_single_replication() {
        let mut d = small_design(vec![Estimator::Qmle]);
        d.replications = 1;
        assert!(mc_study(&d).is_err());
    }

    #[test]
    fn ratio_se_is_zero_for_proportional_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        assert!(ratio_se(&a, &b) < 1e-12);
    }
}
