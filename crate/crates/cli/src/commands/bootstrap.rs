use std::path::{Path, PathBuf};

use clap::Args;
use rank_garch::bootstrap::{bootstrap_distribution, confidence_intervals, MIN_REPLICATES};
use rank_garch::{BootstrapConfig, BootstrapRun, Estimator};

use super::{config_text, defaults, format, load_and_fit, status, FitArgs, Defaults, FIT_DEFAULTS};
use crate::error::{CliError, CliResult, Status};
use crate::output::{emit, Cell, Header, Table};
use crate::settings::Settings;

pub const BOOT_DEFAULTS: Defaults = &[
    ("scheme", Some("u")),
    ("b", Some("2000")),
    ("k_star", Some("20")),
    ("levels", Some("0.90,0.95")),
    ("sigma_mode", Some("theoretical")),
    ("weighted_info", Some("false")),
];

#[derive(Args, Debug)]
pub struct BootstrapCmd {
    #[command(flatten)]
    fit: FitArgs,
    /// Weight scheme: m, e or u.
    #[arg(long)]
    scheme: Option<String>,
    /// Number of bootstrap replicates.
    #[arg(long = "B", value_name = "B")]
    b: Option<String>,
    /// Weighted one-step updates per replicate.
    #[arg(long = "k-star", alias = "kstar")]
    k_star: Option<String>,
    /// Comma-separated confidence levels in (0, 1).
    #[arg(long)]
    levels: Option<String>,
    /// theoretical or empirical.
    #[arg(long)]
    sigma_mode: Option<String>,
    /// Weight the information matrix as well as the score (true/false).
    #[arg(long)]
    weighted_info: Option<String>,
    /// Histogram bins per parameter.
    #[arg(long)]
    bins: Option<String>,
    /// Intervals file.
    #[arg(short, long)]
    output: PathBuf,
    /// Replicates file (default: `<output stem>.replicates.<ext>`).
    #[arg(long)]
    replicates_out: Option<PathBuf>,
    /// Optional histogram-bin file for the replicates.
    #[arg(long)]
    histogram: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long)]
    format: Option<String>,
}

/// `dir/ci.csv` becomes `dir/ci.replicates.csv`.
pub fn replicates_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match output.extension() {
        Some(ext) => format!("{stem}.replicates.{}", ext.to_string_lossy()),
        None => format!("{stem}.replicates"),
    };
    output.with_file_name(name)
}

pub fn bootstrap_config(s: &Settings, seed: u64) -> CliResult<BootstrapConfig> {
    Ok(BootstrapConfig {
        scheme: s.parse("scheme")?,
        replicates: s.parse("b")?,
        k_star: s.parse("k_star")?,
        sigma_mode: s.parse("sigma_mode")?,
        weighted_info: s.parse("weighted_info")?,
        seed,
        ..BootstrapConfig::default()
    })
}

impl BootstrapCmd {
    pub fn run(&self, config: Option<&Path>) -> CliResult<Status> {
        let mut flags = self.fit.flags();
        flags.extend([
            ("scheme", self.scheme.clone()),
            ("b", self.b.clone()),
            ("k_star", self.k_star.clone()),
            ("levels", self.levels.clone()),
            ("sigma_mode", self.sigma_mode.clone()),
            ("weighted_info", self.weighted_info.clone()),
            ("bins", self.bins.clone()),
            ("format", self.format.clone()),
        ]);
        let keys = defaults(&[
            FIT_DEFAULTS,
            BOOT_DEFAULTS,
            &[("bins", Some("30")), ("format", Some("csv"))],
        ]);
        let s = Settings::resolve(&keys, config_text(config)?.as_deref(), &flags)?;
        let format = format(&s)?;
        let levels = s.list_f64("levels")?;
        if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(CliError::input(format!("level {l} is outside (0, 1)")));
        }
        let bins: usize = s.parse("bins")?;
        let cfg = bootstrap_config(&s, s.seed()?)?;
        let score = match s.parse::<Estimator>("score")? {
            Estimator::Rank(score) => score,
            other => {
                return Err(CliError::input(format!(
                    "bootstrap needs a rank score (sign, wilcoxon or vdw), got {other}"
                )))
            }
        };

        let f = load_and_fit(&self.fit, &s)?;
        let run = bootstrap_distribution(&f.fit, &f.x, score, &cfg)?;
        let header = Header::new("bootstrap", &s, Some(f.sha256.clone()))?;

        let mut iv = Table::new(&["param", "level", "estimate", "lower", "upper"]);
        iv.meta("c_hat", f.fit.c_hat)
            .meta("converged", f.fit.converged)
            .meta("replicates_requested", run.requested)
            .meta("replicates_used", run.len())
            .meta("failures", run.failures)
            .meta("sigma_n", run.sigma_n)
            .meta("low_b", run.is_low_b());
        if run.len() >= MIN_REPLICATES {
            for i in confidence_intervals(&run, &levels)? {
                iv.row(vec![i.param.into(), i.level.into(), i.estimate.into(), i.lower.into(), i.upper.into()]);
            }
            iv.meta("intervals", "ok");
        } else {
            eprintln!(
                "warning: {} replicates survived; intervals need at least {MIN_REPLICATES}",
                run.len()
            );
            iv.meta("intervals", format!("skipped: need at least {MIN_REPLICATES} replicates"));
        }
        emit(Some(&self.output), &iv.render(&header, format))?;

        let reps_path = self.replicates_out.clone().unwrap_or_else(|| replicates_path(&self.output));
        emit(Some(&reps_path), &replicate_table(&run).render(&header, format))?;
        if let Some(path) = &self.histogram {
            emit(Some(path), &histogram_table(&run, bins)?.render(&header, format))?;
        }
        Ok(status(f.fit.converged))
    }
}

fn replicate_table(run: &BootstrapRun) -> Table {
    let names = run.spec().param_names();
    let mut cols = vec!["replicate"];
    cols.extend(names.iter().map(String::as_str));
    let mut t = Table::new(&cols);
    t.meta("sigma_n", run.sigma_n).meta("scheme", run.scheme.to_string());
    for (stream, r) in run.streams.iter().zip(&run.replicates) {
        let mut row: Vec<Cell> = vec![(*stream).into()];
        row.extend(r.iter().map(|v| Cell::Num(*v)));
        t.row(row);
    }
    t
}

/// Equal-width bins over each parameter's replicate range.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return Vec::new();
    }
    if !(hi > lo) {
        return vec![(lo, hi, values.len())];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width }, c))
        .collect()
}

fn histogram_table(run: &BootstrapRun, bins: usize) -> CliResult<Table> {
    if bins == 0 {
        return Err(CliError::input("bins must be at least 1"));
    }
    let mut t = Table::new(&["param", "bin", "lower", "upper", "count"]);
    for (j, name) in run.spec().param_names().iter().enumerate() {
        let vals: Vec<f64> = run.replicates.iter().map(|r| r[j]).collect();
        for (k, (lo, hi, c)) in histogram(&vals, bins).into_iter().enumerate() {
            t.row(vec![name.as_str().into(), k.into(), lo.into(), hi.into(), c.into()]);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replicate_path_inserts_suffix() {
        assert_eq!(replicates_path(Path::new("out/ci.csv")), Path::new("out/ci.replicates.csv"));
        assert_eq!(replicates_path(Path::new("ci")), Path::new("ci.replicates"));
    }

    #[test]
    fn histogram_counts_everything() {
        let h = histogram(&[0.0, 0.1, 0.5, 1.0], 2);
        assert_eq!(h, vec![(0.0, 0.5, 2), (0.5, 1.0, 2)]);
        assert_eq!(histogram(&[3.0, 3.0], 5), vec![(3.0, 3.0, 2)]);
        assert!(histogram(&[], 5).is_empty());
    }
}
