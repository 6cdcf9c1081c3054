//! Subcommands and the settings they share.

pub mod bootstrap;
pub mod functionals;
pub mod qq;
pub mod simulate;
pub mod study;

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use rank_garch::estimators::fit;
use rank_garch::{Estimator, Family, FitConfig, FitResult, Init, InnovationDistribution, ModelSpec, ParamVector};

use crate::error::{CliError, CliResult, Status};
use crate::input::read_returns;
use crate::output::{emit, Cell, Format, Header, Table};
use crate::settings::Settings;

pub type Defaults = &'static [(&'static str, Option<&'static str>)];

pub const FIT_DEFAULTS: Defaults = &[
    ("model", Some("garch")),
    ("p", Some("1")),
    ("q", Some("1")),
    ("score", Some("vdw")),
    ("iters", Some("20")),
    ("tol", Some("1e-8")),
    ("init", Some("qmle")),
    ("rho", Some("1")),
    ("seed", Some("0")),
];

/// Reads the `--config` file, if any.
pub fn config_text(path: Option<&Path>) -> CliResult<Option<String>> {
    path.map(|p| fs::read_to_string(p).map_err(|e| CliError::input(format!("{}: {e}", p.display()))))
        .transpose()
}

/// Concatenates default tables.
pub fn defaults(parts: &[Defaults]) -> Vec<(&'static str, Option<&'static str>)> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Estimation flags shared by `fit`, `bootstrap` and `qq`.
#[derive(Args, Debug)]
pub struct FitArgs {
    /// Return series CSV.
    pub input: PathBuf,
    /// garch or gjr.
    #[arg(long)]
    pub model: Option<String>,
    /// ARCH order.
    #[arg(long)]
    pub p: Option<String>,
    /// GARCH order.
    #[arg(long)]
    pub q: Option<String>,
    /// sign, wilcoxon, vdw, qmle or lad.
    #[arg(long)]
    pub score: Option<String>,
    /// Maximum one-step updates.
    #[arg(long)]
    pub iters: Option<String>,
    /// Relative step-norm tolerance.
    #[arg(long)]
    pub tol: Option<String>,
    /// qmle, lad, or a comma-separated starting point in parameter order.
    #[arg(long)]
    pub init: Option<String>,
    /// Step multiplier is 2/(1+rho).
    #[arg(long)]
    pub rho: Option<String>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<String>,
}

impl FitArgs {
    pub fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("model", self.model.clone()),
            ("p", self.p.clone()),
            ("q", self.q.clone()),
            ("score", self.score.clone()),
            ("iters", self.iters.clone()),
            ("tol", self.tol.clone()),
            ("init", self.init.clone()),
            ("rho", self.rho.clone()),
            ("seed", self.seed.clone()),
        ]
    }
}

pub fn model_spec(s: &Settings) -> CliResult<ModelSpec> {
    let family = match s.require("model")?.to_ascii_lowercase().as_str() {
        "garch" => Family::Garch,
        "gjr" => Family::Gjr,
        other => return Err(CliError::input(format!("model = '{other}': expected garch or gjr"))),
    };
    Ok(ModelSpec::new(family, s.parse("p")?, s.parse("q")?)?)
}

pub fn param_vector(s: &Settings, key: &str, spec: ModelSpec) -> CliResult<ParamVector> {
    let flat = s.list_f64(key)?;
    ParamVector::from_flat(spec, &flat).map_err(|e| CliError::input(format!("{key}: {e}")))
}

pub fn fit_config(s: &Settings, spec: ModelSpec) -> CliResult<FitConfig> {
    let init = match s.require("init")?.to_ascii_lowercase().as_str() {
        "qmle" => Init::Qmle,
        "lad" => Init::Lad,
        _ => Init::UserSupplied(param_vector(s, "init", spec)?),
    };
    let cfg = FitConfig {
        init,
        max_iter: s.parse("iters")?,
        tol: s.parse("tol")?,
        rho: s.parse("rho")?,
        ..FitConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn distribution(s: &Settings) -> CliResult<InnovationDistribution> {
    Ok(InnovationDistribution::from_parts(
        s.require("dist")?,
        s.parse_opt("df")?,
        s.parse_opt("shape")?,
    )?)
}

pub fn format(s: &Settings) -> CliResult<Format> {
    s.parse("format")
}

/// Data, checksum, model and the fitted result for the estimation subcommands.
pub struct Fitted {
    pub x: Vec<f64>,
    pub sha256: String,
    pub estimator: Estimator,
    pub fit: FitResult,
}

pub fn load_and_fit(args: &FitArgs, s: &Settings) -> CliResult<Fitted> {
    let spec = model_spec(s)?;
    let estimator: Estimator = s.parse("score")?;
    let cfg = fit_config(s, spec)?;
    let (x, sha256) = read_returns(&args.input)?;
    let fit = fit(&x, estimator, &cfg, spec)?;
    Ok(Fitted { x, sha256, estimator, fit })
}

pub fn status(converged: bool) -> Status {
    if converged {
        Status::Ok
    } else {
        Status::NotConverged
    }
}

#[derive(Args, Debug)]
pub struct FitCmd {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long)]
    pub format: Option<String>,
}

impl FitCmd {
    pub fn run(&self, config: Option<&Path>) -> CliResult<Status> {
        let mut flags = self.fit.flags();
        flags.push(("format", self.format.clone()));
        let s = Settings::resolve(
            &defaults(&[FIT_DEFAULTS, &[("format", Some("csv"))]]),
            config_text(config)?.as_deref(),
            &flags,
        )?;
        let format = format(&s)?;
        let f = load_and_fit(&self.fit, &s)?;
        let header = Header::new("fit", &s, Some(f.sha256.clone()))?;
        emit(self.output.as_deref(), &fit_table(&f).render(&header, format))?;
        Ok(status(f.fit.converged))
    }
}

/// Long-form fit report: `section,name,value`.
pub fn fit_table(f: &Fitted) -> Table {
    let r = &f.fit;
    let mut t = Table::new(&["section", "name", "value"]);
    let summary: [(&str, Cell); 6] = [
        ("estimator", f.estimator.to_string().into()),
        ("model", r.theta.spec().to_string().into()),
        ("n", f.x.len().into()),
        ("c_hat", r.c_hat.into()),
        ("converged", r.converged.into()),
        ("iterations", r.iterations_used.into()),
    ];
    for (k, v) in summary {
        t.row(vec!["summary".into(), k.into(), v]);
    }
    let names = r.theta.spec().param_names();
    for (section, theta) in [("theta_phi", &r.theta_phi), ("theta", &r.theta)] {
        for (n, v) in names.iter().zip(theta.to_flat()) {
            t.row(vec![section.into(), n.as_str().into(), v.into()]);
        }
    }
    for (i, s) in r.step_norms.iter().enumerate() {
        t.row(vec!["step".into(), (i + 1).to_string().into(), (*s).into()]);
    }
    t
}
