//! Design-file driven Monte Carlo studies.

use std::path::{Path, PathBuf};

use clap::Args;
use rank_garch::analysis::mc::LOW_REPLICATIONS;
use rank_garch::analysis::{coverage_experiment, mc_study, CoverageDesign, McDesign};
use rank_garch::{Estimator, FitConfig, Init, ScoreFunction};

use super::bootstrap::{bootstrap_config, BOOT_DEFAULTS};
use super::{defaults, distribution, format, model_spec, param_vector, Defaults};
use crate::error::{CliError, CliResult, Status};
use crate::input::read_text;
use crate::output::{emit, Header, Table};
use crate::settings::Settings;

const DESIGN_DEFAULTS: Defaults = &[
    ("model", Some("garch")),
    ("p", Some("1")),
    ("q", Some("1")),
    ("params", None),
    ("dist", Some("normal")),
    ("df", None),
    ("shape", None),
    ("n", Some("1000")),
    ("replications", Some("200")),
    ("burnin", Some("500")),
    ("iters", Some("20")),
    ("tol", Some("1e-8")),
    ("rho", Some("1")),
    ("seed", Some("0")),
    ("format", Some("csv")),
];

/// Flags shared by both studies; they override the design file.
#[derive(Args, Debug)]
pub struct StudyArgs {
    /// Flat `key = value` design file.
    #[arg(long)]
    design_file: PathBuf,
    #[arg(long)]
    seed: Option<String>,
    /// Monte Carlo replications R.
    #[arg(long, short = 'R')]
    replications: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// csv or jsonl.
    #[arg(long)]
    format: Option<String>,
    /// Report file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl StudyArgs {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("seed", self.seed.clone()),
            ("replications", self.replications.clone()),
            ("n", self.n.clone()),
            ("format", self.format.clone()),
        ]
    }

    fn load(
        &self,
        config: Option<&Path>,
        keys: &[(&str, Option<&str>)],
        extra: Vec<(&'static str, Option<String>)>,
    ) -> CliResult<(Settings, String)> {
        if config.is_some() {
            return Err(CliError::input("studies take their settings from --design-file, not --config"));
        }
        let (text, sha) = read_text(&self.design_file)?;
        let mut flags = self.flags();
        flags.extend(extra);
        let s = Settings::resolve(keys, Some(&text), &flags)
            .map_err(|e| CliError::input(format!("{}: {e}", self.design_file.display())))?;
        Ok((s, sha))
    }
}

fn iteration_config(s: &Settings) -> CliResult<FitConfig> {
    let cfg = FitConfig {
        max_iter: s.parse("iters")?,
        tol: s.parse("tol")?,
        rho: s.parse("rho")?,
        init: Init::Qmle,
        ..FitConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Args, Debug)]
pub struct CoverageCmd {
    #[command(flatten)]
    study: StudyArgs,
    /// Bootstrap replicates per Monte Carlo replication.
    #[arg(long = "B", value_name = "B")]
    b: Option<String>,
}

impl CoverageCmd {
    pub fn run(&self, config: Option<&Path>) -> CliResult<Status> {
        let keys = defaults(&[DESIGN_DEFAULTS, BOOT_DEFAULTS, &[("score", Some("sign"))]]);
        let (s, sha) = self.study.load(config, &keys, vec![("b", self.b.clone())])?;
        let format = format(&s)?;
        let score: ScoreFunction = s.parse("score")?;
        let spec = model_spec(&s)?;
        let design = CoverageDesign {
            theta0: param_vector(&s, "params", spec)?,
            dist: distribution(&s)?,
            n: s.parse("n")?,
            replications: s.parse("replications")?,
            score,
            levels: s.list_f64("levels")?,
            seed: s.seed()?,
            burnin: s.parse("burnin")?,
            bootstrap: bootstrap_config(&s, 0)?,
            fit: FitConfig { score, ..iteration_config(&s)? },
        };
        let r = coverage_experiment(&design)?;
        let mut t = Table::new(&["param", "level", "covered", "total", "percent", "se", "mean_width"]);
        t.meta("model", r.spec.to_string())
            .meta("scheme", r.scheme.to_string())
            .meta("score", r.score.to_string())
            .meta("n", r.n)
            .meta("replications", r.replications)
            .meta("replications_used", r.replications_used)
            .meta("failed_replications", r.failed_replications)
            .meta("b", r.b)
            .meta("low_b", r.low_b)
            .meta("low_replications", r.replications_used < LOW_REPLICATIONS);
        for c in &r.cells {
            t.row(vec![
                c.param.as_str().into(),
                c.level.into(),
                c.covered.into(),
                c.total.into(),
                c.percent.into(),
                c.se.into(),
                c.mean_width.into(),
            ]);
        }
        let header = Header::new("coverage", &s, Some(sha))?;
        emit(self.study.output.as_deref(), &t.render(&header, format))?;
        Ok(Status::Ok)
    }
}

#[derive(Args, Debug)]
pub struct BenchmarkCmd {
    #[command(flatten)]
    study: StudyArgs,
    /// Comma-separated estimators, e.g. qmle,sign,vdw.
    #[arg(long)]
    estimators: Option<String>,
}

impl BenchmarkCmd {
    pub fn run(&self, config: Option<&Path>) -> CliResult<Status> {
        let keys = defaults(&[DESIGN_DEFAULTS, &[("estimators", Some("qmle,sign,wilcoxon,vdw"))]]);
        let (s, sha) = self.study.load(config, &keys, vec![("estimators", self.estimators.clone())])?;
        let format = format(&s)?;
        let estimators = s
            .require("estimators")?
            .split(',')
            .map(|e| e.trim().parse::<Estimator>())
            .collect::<Result<Vec<_>, _>>()?;
        let spec = model_spec(&s)?;
        let design = McDesign {
            theta0: param_vector(&s, "params", spec)?,
            dist: distribution(&s)?,
            n: s.parse("n")?,
            replications: s.parse("replications")?,
            estimators,
            seed: s.seed()?,
            burnin: s.parse("burnin")?,
            fit: iteration_config(&s)?,
        };
        let r = mc_study(&design)?;
        let mut t = Table::new(&[
            "estimator", "param", "theta0", "bias", "bias_se", "mse", "mse_se", "are", "are_se",
            "failures", "not_converged",
        ]);
        t.meta("model", r.spec.to_string())
            .meta("n", r.n)
            .meta("replications", r.replications)
            .meta("replications_used", r.replications_used)
            .meta("qmle_failures", r.qmle_failures)
            .meta("low_replications", r.low_replications);
        for e in &r.estimators {
            for (k, name) in r.param_names.iter().enumerate() {
                t.row(vec![
                    e.estimator.to_string().into(),
                    name.as_str().into(),
                    r.theta0[k].into(),
                    e.bias[k].into(),
                    e.bias_se[k].into(),
                    e.mse[k].into(),
                    e.mse_se[k].into(),
                    e.are[k].into(),
                    e.are_se[k].into(),
                    e.failures.into(),
                    e.not_converged.into(),
                ]);
            }
        }
        let header = Header::new("benchmark", &s, Some(sha))?;
        emit(self.study.output.as_deref(), &t.render(&header, format))?;
        Ok(Status::Ok)
    }
}
