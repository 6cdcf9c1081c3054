use std::path::{Path, PathBuf};

use clap::Args;
use rank_garch::simulate::simulate_stream;
use rank_garch::SimSpec;

use super::{config_text, distribution, model_spec, param_vector, Defaults};
use crate::error::{CliResult, Status};
use crate::output::{emit, Cell, Format, Header, Table};
use crate::settings::Settings;

const DEFAULTS: Defaults = &[
    ("model", Some("garch")),
    ("p", Some("1")),
    ("q", Some("1")),
    ("params", None),
    ("n", Some("1000")),
    ("burnin", Some("500")),
    ("dist", Some("normal")),
    ("df", None),
    ("shape", None),
    ("seed", Some("0")),
];

#[derive(Args, Debug)]
pub struct SimulateCmd {
    /// garch or gjr.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    /// Comma-separated θ in parameter order (omega, alpha.., [gamma..,] beta..).
    #[arg(long)]
    params: Option<String>,
    /// Path length after burn-in.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    burnin: Option<String>,
    /// normal, de, logistic, t or skewnormal.
    #[arg(long)]
    dist: Option<String>,
    /// Student-t degrees of freedom (> 2).
    #[arg(long)]
    df: Option<String>,
    /// Skew-normal shape.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output CSV (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl SimulateCmd {
    pub fn run(&self, config: Option<&Path>) -> CliResult<Status> {
        let flags = [
            ("model", self.model.clone()),
            ("p", self.p.clone()),
            ("q", self.q.clone()),
            ("params", self.params.clone()),
            ("n", self.n.clone()),
            ("burnin", self.burnin.clone()),
            ("dist", self.dist.clone()),
            ("df", self.df.clone()),
            ("shape", self.shape.clone()),
            ("seed", self.seed.clone()),
        ];
        let s = Settings::resolve(DEFAULTS, config_text(config)?.as_deref(), &flags)?;
        let spec = SimSpec {
            burnin: s.parse("burnin")?,
            ..SimSpec::new(
                param_vector(&s, "params", model_spec(&s)?)?,
                s.parse("n")?,
                distribution(&s)?,
                s.seed()?,
            )
        };
        let x = simulate_stream(&spec, 0)?;
        let mut t = Table::new(&["x"]);
        for v in x.iter() {
            t.row(vec![Cell::Num(*v)]);
        }
        let header = Header::new("simulate", &s, None)?;
        emit(self.output.as_deref(), &t.render(&header, Format::Csv))?;
        Ok(Status::Ok)
    }
}
