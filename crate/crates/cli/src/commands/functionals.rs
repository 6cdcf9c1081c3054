use std::path::{Path, PathBuf};

use clap::Args;
use rank_garch::analysis::functionals::QuadConfig;
use rank_garch::analysis::{are_sign_vs_qmle, score_functionals};
use rank_garch::{Error, ScoreFunction};

use super::{config_text, distribution, format, Defaults};
use crate::error::{CliResult, Status};
use crate::output::{emit, Header, Table};
use crate::settings::Settings;

const DEFAULTS: Defaults = &[
    ("dist", Some("normal")),
    ("df", None),
    ("shape", None),
    ("seed", Some("0")),
    ("format", Some("csv")),
];

#[derive(Args, Debug)]
pub struct FunctionalsCmd {
    /// normal, de, logistic, t or skewnormal.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    df: Option<String>,
    #[arg(long)]
    shape: Option<String>,
    /// csv or jsonl.
    #[arg(long)]
    format: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl FunctionalsCmd {
    pub fn run(&self, config: Option<&Path>) -> CliResult<Status> {
        let flags = [
            ("dist", self.dist.clone()),
            ("df", self.df.clone()),
            ("shape", self.shape.clone()),
            ("format", self.format.clone()),
        ];
        let s = Settings::resolve(DEFAULTS, config_text(config)?.as_deref(), &flags)?;
        let format = format(&s)?;
        let dist = distribution(&s)?;
        let mut t = Table::new(&["score", "c_phi", "gamma_phi", "lambda_phi", "rho_phi", "sigma2_phi"]);
        t.meta("dist", dist.to_string());
        match are_sign_vs_qmle(&dist) {
            Ok(a) => t.meta("are_sign_vs_qmle", a),
            Err(Error::InfiniteFourthMoment) => t.meta("are_sign_vs_qmle", "inf"),
            Err(e) => return Err(e.into()),
        };
        for score in ScoreFunction::ALL {
            let f = score_functionals(&dist, score, &QuadConfig::default())?;
            t.row(vec![
                score.to_string().into(),
                f.c_phi.into(),
                f.gamma_phi.into(),
                f.lambda_phi.into(),
                f.rho_phi.into(),
                f.sigma2_phi.into(),
            ]);
        }
        let header = Header::new("functionals", &s, None)?;
        emit(self.output.as_deref(), &t.render(&header, format))?;
        Ok(Status::Ok)
    }
}
