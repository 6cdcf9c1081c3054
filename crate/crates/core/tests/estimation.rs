//! Statistical behaviour of the estimators on simulated paths.

use rank_garch::estimators::{fit_lad, fit_qmle, fit_r_estimator, qmle_objective, FitConfig, Init};
use rank_garch::simulate::{simulate_gjr, simulate_stream};
use rank_garch::{InnovationDistribution, ParamVector, ScoreFunction, SimSpec};

const SEED: u64 = 77;

fn theta0() -> ParamVector {
    ParamVector::garch11(6.5e-6, 0.177, 0.716)
}

fn path(n: usize, dist: InnovationDistribution, index: u64) -> Vec<f64> {
    simulate_stream(&SimSpec::new(theta0(), n, dist, SEED), index)
        .unwrap()
        .into_inner()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn rescaling_identity_is_exact() {
    let x = path(1000, InnovationDistribution::Normal, 0);
    for score in ScoreFunction::ALL {
        let f = fit_r_estimator(&x, &FitConfig::with_score(score), theta0().spec()).unwrap();
        assert_eq!(f.theta.omega * f.c_hat, f.theta_phi.omega);
        assert_eq!(f.theta.beta, f.theta_phi.beta);
        assert!((f.theta.alpha[0] * f.c_hat - f.theta_phi.alpha[0]).abs() <= 1e-16);
        assert_eq!(f.iterations_used, f.step_norms.len());
    }
}

#[test]
fn r_estimate_is_scale_equivariant() {
    let x = path(1000, InnovationDistribution::Normal, 1);
    let xk: Vec<f64> = x.iter().map(|v| 10.0 * v).collect();
    let spec = theta0().spec();
    let a = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Vdw), spec).unwrap();
    let b = fit_r_estimator(&xk, &FitConfig::with_score(ScoreFunction::Vdw), spec).unwrap();
    // QMLE starts differ at optimizer precision, which the rank iteration
    // carries to its own noise floor
    assert!(rel(b.theta.omega, 100.0 * a.theta.omega) < 1e-4);
    assert!(rel(b.theta.alpha[0], a.theta.alpha[0]) < 1e-4);
    assert!(rel(b.theta.beta[0], a.theta.beta[0]) < 1e-4);
}

#[test]
fn lad_is_scale_equivariant() {
    let x = path(1000, InnovationDistribution::Normal, 2);
    let xk: Vec<f64> = x.iter().map(|v| 10.0 * v).collect();
    let a = fit_lad(&x, theta0().spec(), None).unwrap();
    let b = fit_lad(&xk, theta0().spec(), None).unwrap();
    assert!(rel(b.theta.omega, 100.0 * a.theta.omega) < 1e-3);
    assert!(rel(b.theta.beta[0], a.theta.beta[0]) < 1e-3);
}

#[test]
fn qmle_and_lad_starts_reach_the_same_estimate() {
    let x = path(1000, InnovationDistribution::Normal, 3);
    let spec = theta0().spec();
    for score in ScoreFunction::ALL {
        let q = fit_r_estimator(&x, &FitConfig { init: Init::Qmle, ..FitConfig::with_score(score) }, spec).unwrap();
        let l = fit_r_estimator(&x, &FitConfig { init: Init::Lad, ..FitConfig::with_score(score) }, spec).unwrap();
        let (a, b) = (q.theta.to_flat(), l.theta.to_flat());
        for k in 0..3 {
            assert!(rel(a[k], b[k]) < 1e-4, "{score} slot {k}: {} vs {}", a[k], b[k]);
        }
    }
}

#[test]
fn step_norms_shrink_from_a_qmle_start() {
    let x = path(1000, InnovationDistribution::Normal, 4);
    let f = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Wilcoxon), theta0().spec()).unwrap();
    let s = &f.step_norms;
    assert!(s[s.len() - 1] < 1e-3 * s[0], "{s:?}");
}

#[test]
fn lad_is_close_to_sign_estimate() {
    let spec = theta0().spec();
    for index in 0..3 {
        let x = path(1000, InnovationDistribution::Normal, 10 + index);
        let lad = fit_lad(&x, spec, None).unwrap().theta.to_flat();
        let sign = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Sign), spec)
            .unwrap()
            .theta
            .to_flat();
        for k in 0..3 {
            assert!(rel(lad[k], sign[k]) < 0.10, "path {index} slot {k}: {} vs {}", lad[k], sign[k]);
        }
    }
}

#[test]
fn scale_estimate_tracks_the_score_constant() {
    let x = path(5000, InnovationDistribution::Normal, 20);
    let spec = theta0().spec();
    let sign = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Sign), spec).unwrap();
    let wil = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Wilcoxon), spec).unwrap();
    assert!((sign.c_hat - 2.0 / std::f64::consts::PI).abs() < 0.05);
    assert!((wil.c_hat - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 0.01);
}

#[test]
fn qmle_does_not_increase_objective_from_truth() {
    let x = path(1000, InnovationDistribution::Normal, 30);
    let f = fit_qmle(&x, theta0().spec(), Some(&theta0())).unwrap();
    assert!(f.converged);
    assert!(qmle_objective(&f.theta, &x).unwrap() <= qmle_objective(&theta0(), &x).unwrap());
    assert_eq!(f.c_hat, 1.0);
    assert_eq!(f.theta, f.theta_phi);
}

#[test]
fn qmle_recovers_unconditional_variance() {
    let th = ParamVector::garch11(1e-4, 1e-4, 0.5);
    let x = simulate_stream(&SimSpec::new(th.clone(), 4000, InnovationDistribution::Normal, SEED), 0).unwrap();
    let f = fit_qmle(&x, th.spec(), None).unwrap();
    let implied = f.theta.omega / (1.0 - f.theta.alpha[0] - f.theta.beta[0]);
    assert!(rel(implied, x.mean_square()) < 0.1);
}

#[test]
fn consistency_improves_with_n() {
    let spec = theta0().spec();
    let mean_err = |n: usize| {
        (0..20)
            .map(|r| {
                let x = path(n, InnovationDistribution::Normal, 100 + r);
                let f = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Vdw), spec).unwrap();
                (f.theta.alpha[0] - 0.177).abs() + (f.theta.beta[0] - 0.716).abs()
            })
            .sum::<f64>()
            / 20.0
    };
    assert!(mean_err(5000) < mean_err(500));
}

#[test]
fn gjr_fit_recovers_leverage() {
    let th = ParamVector::gjr11(3.45e-4, 0.0658, 0.0843, 0.8182);
    let x = simulate_gjr(&SimSpec::new(th.clone(), 5000, InnovationDistribution::Normal, SEED)).unwrap();
    let f = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Vdw), th.spec()).unwrap();
    assert!((f.theta.gamma[0] - 0.0843).abs() < 0.05, "{:?}", f.theta);
    assert!((f.theta.beta[0] - 0.8182).abs() < 0.05, "{:?}", f.theta);
}

#[test]
fn heavy_tails_do_not_break_r_estimation() {
    for index in 0..5 {
        let x = path(1000, InnovationDistribution::StudentT(3.0), 200 + index);
        let f = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Sign), theta0().spec()).unwrap();
        assert!(f.theta.validate(true).is_ok());
    }
}
