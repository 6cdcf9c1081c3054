//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p rank-garch --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use rank_garch::analysis::coverage::{coverage_experiment, CoverageDesign, CoverageReport};
use rank_garch::analysis::functionals::{are_sign_vs_qmle, score_functionals, QuadConfig};
use rank_garch::analysis::mc::{mc_study, McDesign, McStudyReport};
use rank_garch::bootstrap::{bootstrap_distribution, bootstrap_replicate, draw_weights};
use rank_garch::estimators::{fit_r_estimator, FitConfig, Init};
use rank_garch::model::{expansion_coefficients, filter_variance, filter_variance_gradient};
use rank_garch::rng::{self, stream};
use rank_garch::scores::compute_ranks;
use rank_garch::simulate::{simulate_gjr, simulate_stream};
use rank_garch::{
    BootstrapConfig, Estimator, InnovationDistribution, ModelSpec, ParamVector, ScoreFunction,
    SimSpec, WeightScheme,
};

use rand::Rng as _;

const SEED: u64 = 20_240_611;

fn table2_theta() -> ParamVector {
    ParamVector::garch11(6.5e-6, 0.177, 0.716)
}

fn gjr_theta() -> ParamVector {
    ParamVector::gjr11(3.45e-4, 0.0658, 0.0843, 0.8182)
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("({})", parts.join(", "))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn are_of(report: &McStudyReport, e: Estimator) -> Vec<f64> {
    report.summary(e).expect("estimator in study").are.clone()
}

fn study(theta: ParamVector, dist: InnovationDistribution, n: usize, r: usize, est: Vec<Estimator>) -> McStudyReport {
    mc_study(&McDesign::new(theta, dist, n, r, est, SEED)).expect("mc study")
}

fn c1() -> Outcome {
    let are = are_sign_vs_qmle(&InnovationDistribution::Normal).unwrap();
    outcome((are - 0.876).abs() <= 0.001, format!("ARE(sign, normal) = {are:.5}"))
}

fn c2() -> Outcome {
    let f = score_functionals(&InnovationDistribution::Normal, ScoreFunction::Sign, &QuadConfig::default()).unwrap();
    let pi = std::f64::consts::PI;
    let pass = f.gamma_phi.abs() <= 1e-6
        && f.lambda_phi.abs() <= 1e-6
        && f.rho_phi.abs() <= 1e-6
        && (f.sigma2_phi - (pi / 2.0 - 1.0)).abs() <= 1e-4
        && (f.c_phi - 2.0 / pi).abs() <= 1e-6;
    outcome(
        pass,
        format!(
            "gamma={:.2e} lambda={:.2e} rho={:.2e} sigma2={:.6} c={:.7}",
            f.gamma_phi, f.lambda_phi, f.rho_phi, f.sigma2_phi, f.c_phi
        ),
    )
}

fn c3() -> Outcome {
    let vdw = Estimator::Rank(ScoreFunction::Vdw);
    let r = study(table2_theta(), InnovationDistribution::Normal, 1000, 200, vec![vdw]);
    let are = are_of(&r, vdw);
    outcome(
        are.iter().all(|a| (0.85..=1.15).contains(a)),
        format!("vdW ARE {} over {} replications", fmt(&are), r.replications_used),
    )
}

fn c4_c5() -> (Outcome, Outcome) {
    let sign = Estimator::Rank(ScoreFunction::Sign);
    let t3 = InnovationDistribution::StudentT(3.0);
    let r1000 = study(table2_theta(), t3, 1000, 200, vec![sign]);
    let a1000 = are_of(&r1000, sign);
    let c4 = outcome(
        a1000.iter().all(|a| *a > 2.0),
        format!(
            "sign ARE {} over {} replications ({} QMLE failures)",
            fmt(&a1000),
            r1000.replications_used,
            r1000.qmle_failures
        ),
    );
    let r3000 = study(table2_theta(), t3, 3000, 100, vec![sign]);
    let a3000 = are_of(&r3000, sign);
    let c5 = outcome(
        a3000.iter().zip(&a1000).all(|(hi, lo)| hi > lo),
        format!(
            "sign ARE n=3000 {} vs n=1000 {} ({} used)",
            fmt(&a3000),
            fmt(&a1000),
            r3000.replications_used
        ),
    );
    (c4, c5)
}

fn coverage(score: ScoreFunction, n: usize) -> CoverageReport {
    let d = CoverageDesign::new(
        table2_theta(),
        InnovationDistribution::Normal,
        n,
        200,
        score,
        WeightScheme::U,
        500,
        SEED,
    );
    coverage_experiment(&d).expect("coverage experiment")
}

fn percents(r: &CoverageReport, level: f64) -> Vec<f64> {
    (0..3).map(|j| r.cell(j, level).unwrap().percent).collect()
}

fn c6_c7() -> (Outcome, Outcome) {
    let base = coverage(ScoreFunction::Sign, 1000);
    let p95 = percents(&base, 0.95);
    let p90 = percents(&base, 0.90);
    let within = |got: &[f64], want: &[f64], tol: f64| got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol);
    let c6 = outcome(
        within(&p95, &[94.8, 94.7, 93.7], 5.0) && within(&p90, &[91.7, 90.2, 89.6], 5.0),
        format!(
            "95%: {} 90%: {} ({} used, {} failed)",
            fmt(&p95),
            fmt(&p90),
            base.replications_used,
            base.failed_replications
        ),
    );

    let mut pass = true;
    let mut parts = Vec::new();
    for score in [ScoreFunction::Sign, ScoreFunction::Wilcoxon, ScoreFunction::Vdw] {
        for n in [500, 1000] {
            let r = if score == ScoreFunction::Sign && n == 1000 {
                base.clone()
            } else {
                coverage(score, n)
            };
            let (a, b) = (percents(&r, 0.95), percents(&r, 0.90));
            pass &= a.iter().all(|v| (v - 95.0).abs() <= 6.0) && b.iter().all(|v| (v - 90.0).abs() <= 6.0);
            parts.push(format!("{score} n={n} 95%{} 90%{}", fmt(&a), fmt(&b)));
        }
    }
    (c6, outcome(pass, parts.join("; ")))
}

fn c8() -> Outcome {
    let vdw = Estimator::Rank(ScoreFunction::Vdw);
    let r = study(gjr_theta(), InnovationDistribution::Normal, 1000, 100, vec![vdw]);
    let are = are_of(&r, vdw);
    outcome(
        are.iter().all(|a| (0.85..=1.15).contains(a)),
        format!("vdW ARE {} over {} replications", fmt(&are), r.replications_used),
    )
}

fn c9() -> Outcome {
    let mut failures = Vec::new();
    let mut note = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };
    let theta = table2_theta();
    let x = simulate_stream(&SimSpec::new(theta.clone(), 1000, InnovationDistribution::Normal, SEED), 0).unwrap();

    // filter against the ARCH(∞) expansion with zero pre-sample returns
    let v = filter_variance(&theta, &x).unwrap();
    let c = expansion_coefficients(&theta, x.len()).unwrap();
    let worst = (0..x.len())
        .map(|t| {
            let direct: f64 = c[0] + (1..=t).map(|j| c[j] * x[t - j] * x[t - j]).sum::<f64>();
            ((v[t] - direct) / direct).abs()
        })
        .fold(0.0, f64::max);
    note(worst <= 1e-10, "filter vs expansion");

    // analytic gradient against central differences
    let mut r = stream(SEED, rng::TAG_AUX, 9);
    let mut worst_grad: f64 = 0.0;
    for i in 0..20 {
        let spec = [ModelSpec::garch(1, 1), ModelSpec::gjr(1, 1), ModelSpec::garch(2, 1), ModelSpec::garch(1, 2)][i % 4];
        let mut flat = vec![r.random_range(0.05..0.5)];
        for _ in 0..spec.p * if spec.family == rank_garch::Family::Gjr { 2 } else { 1 } {
            flat.push(r.random_range(0.02..0.15) / spec.p as f64);
        }
        for _ in 0..spec.q {
            flat.push(r.random_range(0.3..0.8) / spec.q as f64);
        }
        let th = ParamVector::from_flat(spec, &flat).unwrap();
        let xs: Vec<f64> = (0..200).map(|_| r.random_range(-2.0..2.0)).collect();
        let g = filter_variance_gradient(&th, &xs).unwrap();
        // Richardson-extrapolated central differences, O(h^4)
        let central = |k: usize, h: f64| -> Vec<f64> {
            let mut up = flat.clone();
            let mut dn = flat.clone();
            up[k] += h;
            dn[k] -= h;
            let vu = filter_variance(&ParamVector::from_flat(spec, &up).unwrap(), &xs).unwrap();
            let vd = filter_variance(&ParamVector::from_flat(spec, &dn).unwrap(), &xs).unwrap();
            vu.iter().zip(&vd).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        };
        for k in 0..flat.len() {
            let h = 1e-3 * flat[k];
            let (d1, d2) = (central(k, h), central(k, h / 2.0));
            for t in 0..xs.len() {
                let fd = (4.0 * d2[t] - d1[t]) / 3.0;
                let an = g.grad_row(t)[k];
                worst_grad = worst_grad.max((fd - an).abs() / an.abs().max(1e-8));
            }
        }
    }
    note(worst_grad < 1e-5, "gradient vs finite differences");

    // scale equivariance of the R-estimate
    let start = ParamVector::garch11(8e-6, 0.15, 0.75);
    let cfg = |init: ParamVector| FitConfig {
        init: Init::UserSupplied(init),
        ..FitConfig::with_score(ScoreFunction::Wilcoxon)
    };
    let base = fit_r_estimator(&x, &cfg(start.clone()), theta.spec()).unwrap();
    let xk: Vec<f64> = x.iter().map(|v| 10.0 * v).collect();
    let scaled_start = ParamVector::garch11(100.0 * 8e-6, 0.15, 0.75);
    let scaled = fit_r_estimator(&xk, &cfg(scaled_start), theta.spec()).unwrap();
    let (a, b) = (base.theta.to_flat(), scaled.theta.to_flat());
    let eq = (b[0] / (100.0 * a[0]) - 1.0).abs() < 1e-8 && (a[1] - b[1]).abs() < 1e-8 && (a[2] - b[2]).abs() < 1e-8;
    note(eq, "scale equivariance");

    // unit weights reproduce the point estimate
    let fixed = FitConfig {
        init: Init::UserSupplied(start.clone()),
        max_iter: 5,
        tol: f64::MIN_POSITIVE,
        ..FitConfig::with_score(ScoreFunction::Sign)
    };
    let fit = fit_r_estimator(&x, &fixed, theta.spec()).unwrap();
    let ones = vec![1.0; x.len()];
    let rep = bootstrap_replicate(&start, &x, ScoreFunction::Sign, &ones, 5, fit.c_hat).unwrap();
    note(fit.iterations_used == 5 && rep == fit.theta, "unit-weight degeneracy");

    // ranks are invariant under strictly increasing maps
    let eps: Vec<f64> = x.iter().map(|v| v / theta.unconditional_variance().unwrap().sqrt()).collect();
    let mapped: Vec<f64> = eps.iter().map(|e| e.powi(3) + e).collect();
    note(compute_ranks(&eps).unwrap() == compute_ranks(&mapped).unwrap(), "rank invariance");

    // weights sum to n
    let mut wr = stream(SEED, rng::TAG_AUX, 10);
    for scheme in [WeightScheme::M, WeightScheme::E, WeightScheme::U] {
        let w = draw_weights(scheme, 997, &mut wr).unwrap();
        note((w.iter().sum::<f64>() - 997.0).abs() < 1e-9, "weight normalization");
    }

    // fixed seed reproduces bit for bit
    let s = SimSpec::new(gjr_theta(), 500, InnovationDistribution::StudentT(5.0), SEED);
    note(simulate_gjr(&s).unwrap() == simulate_gjr(&s).unwrap(), "simulation reproducibility");
    let bcfg = BootstrapConfig {
        replicates: 40,
        seed: SEED,
        ..BootstrapConfig::default()
    };
    let b1 = bootstrap_distribution(&fit, &x, ScoreFunction::Sign, &bcfg).unwrap();
    let b2 = bootstrap_distribution(&fit, &x, ScoreFunction::Sign, &bcfg).unwrap();
    note(b1 == b2, "bootstrap reproducibility");

    let detail = format!("filter err {worst:.1e}, gradient rel err {worst_grad:.1e}");
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; failed: {}", failures.join(", ")))
    }
}

fn c10() -> Outcome {
    let theta = table2_theta();
    let x = simulate_stream(&SimSpec::new(theta.clone(), 5000, InnovationDistribution::Normal, SEED), 0).unwrap();
    let sign = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Sign), theta.spec()).unwrap();
    let vdw = fit_r_estimator(&x, &FitConfig::with_score(ScoreFunction::Vdw), theta.spec()).unwrap();
    let target = 2.0 / std::f64::consts::PI;
    outcome(
        (sign.c_hat - target).abs() < 0.05 && (vdw.c_hat - 1.0).abs() < 0.05,
        format!("sign c = {:.4} (target {target:.4}), vdW c = {:.4}", sign.c_hat, vdw.c_hat),
    )
}

fn skew_normal() -> Outcome {
    let vdw = Estimator::Rank(ScoreFunction::Vdw);
    let r = study(table2_theta(), InnovationDistribution::SkewNormal(5.0), 1000, 200, vec![vdw]);
    let are = are_of(&r, vdw);
    outcome(
        are.iter().all(|a| *a >= 1.0),
        format!("vdW ARE {} (MSE_QMLE/MSE_vdW)", fmt(&are)),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |label: &str, started: Instant, o: Outcome| {
        all &= o.pass;
        println!(
            "{label}: {} {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            started.elapsed().as_secs_f64()
        );
    };

    let t = Instant::now();
    report("criterion 1", t, c1());
    let t = Instant::now();
    report("criterion 2", t, c2());
    let t = Instant::now();
    report("criterion 3", t, c3());
    let t = Instant::now();
    let (o4, o5) = c4_c5();
    report("criterion 4", t, o4);
    report("criterion 5", t, o5);
    let t = Instant::now();
    let (o6, o7) = c6_c7();
    report("criterion 6", t, o6);
    report("criterion 7", t, o7);
    let t = Instant::now();
    report("criterion 8", t, c8());
    let t = Instant::now();
    report("criterion 9", t, c9());
    let t = Instant::now();
    report("criterion 10", t, c10());
    let t = Instant::now();
    report("skew-normal", t, skew_normal());

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
