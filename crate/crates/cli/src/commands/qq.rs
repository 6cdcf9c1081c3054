use std::path::{Path, PathBuf};

use clap::Args;
use rank_garch::analysis::qq_data;
use rank_garch::model::residuals;

use super::{config_text, defaults, format, load_and_fit, status, FitArgs, FIT_DEFAULTS};
use crate::error::{CliError, CliResult, Status};
use crate::output::{emit, Format, Header, Table};
use crate::settings::Settings;

#[derive(Args, Debug)]
pub struct QqCmd {
    #[command(flatten)]
    fit: FitArgs,
    /// Comma-separated Student-t degrees of freedom.
    #[arg(long)]
    df: Option<String>,
    /// Scale t quantiles to unit variance (true/false).
    #[arg(long)]
    standardize: Option<String>,
    /// Output prefix; writes `<prefix>_df<df>.<csv|jsonl>` per df.
    #[arg(short, long)]
    output: PathBuf,
    /// csv or jsonl.
    #[arg(long)]
    format: Option<String>,
}

pub fn qq_path(prefix: &Path, df: f64, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Jsonl => "jsonl",
    };
    let name = prefix.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    prefix.with_file_name(format!("{name}_df{df}.{ext}"))
}

impl QqCmd {
    pub fn run(&self, config: Option<&Path>) -> CliResult<Status> {
        let mut flags = self.fit.flags();
        flags.extend([
            ("df", self.df.clone()),
            ("standardize", self.standardize.clone()),
            ("format", self.format.clone()),
        ]);
        let keys = defaults(&[
            FIT_DEFAULTS,
            &[("df", Some("3,5,7")), ("standardize", Some("true")), ("format", Some("csv"))],
        ]);
        let s = Settings::resolve(&keys, config_text(config)?.as_deref(), &flags)?;
        let format = format(&s)?;
        let dfs = s.list_f64("df")?;
        if let Some(d) = dfs.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(CliError::input(format!("df = {d}: must be positive")));
        }
        let standardize: bool = s.parse("standardize")?;
        let f = load_and_fit(&self.fit, &s)?;
        let eps = residuals(&f.fit.theta, &f.x)?;
        let header = Header::new("qq", &s, Some(f.sha256.clone()))?;
        for df in dfs {
            let pts = qq_data(&eps, df, standardize)?;
            let mut t = Table::new(&["i", "theoretical", "sample"]);
            t.meta("df", df).meta("n", pts.len()).meta("converged", f.fit.converged);
            for (i, p) in pts.iter().enumerate() {
                t.row(vec![(i + 1).into(), p.theoretical.into(), p.sample.into()]);
            }
            emit(Some(&qq_path(&self.output, df, format)), &t.render(&header, format))?;
        }
        Ok(status(f.fit.converged))
    }
}
