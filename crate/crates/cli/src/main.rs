//! `rank-garch`: fit, simulate, bootstrap and study GARCH/GJR R-estimators.
//!
//! Exit codes: 0 success, 1 input error, 2 estimator non-convergence (output
//! still written), 3 numerical failure.

mod commands;
mod error;
mod input;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{bootstrap, functionals, qq, simulate, study};
use error::{CliError, CliResult, Status};

const THREADS_ENV: &str = "RANK_GARCH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "rank-garch", version, about = "Rank-based estimation of GARCH and GJR models")]
struct Cli {
    /// Flat `key = value` file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for replication-level parallelism (falls back to RANK_GARCH_THREADS).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model to a return series.
    Fit(commands::FitCmd),
    /// Simulate a GARCH or GJR path.
    Simulate(simulate::SimulateCmd),
    /// Weighted-bootstrap confidence intervals for an R-estimate.
    Bootstrap(bootstrap::BootstrapCmd),
    /// Bootstrap coverage experiment from a design file.
    Coverage(study::CoverageCmd),
    /// Monte Carlo bias/MSE/ARE study from a design file.
    Benchmark(study::BenchmarkCmd),
    /// QQ pairs of fitted residuals against Student-t quantiles.
    Qq(qq::QqCmd),
    /// Score functionals and asymptotic relative efficiencies.
    Functionals(functionals::FunctionalsCmd),
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| CliError::input(format!("{THREADS_ENV} = '{v}': {e}"))),
        _ => Ok(None),
    }
}

fn run(cli: Cli) -> CliResult<Status> {
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(CliError::input("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::input(format!("thread pool: {e}")))?;
    }
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Fit(c) => c.run(config),
        Command::Simulate(c) => c.run(config),
        Command::Bootstrap(c) => c.run(config),
        Command::Coverage(c) => c.run(config),
        Command::Benchmark(c) => c.run(config),
        Command::Qq(c) => c.run(config),
        Command::Functionals(c) => c.run(config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(status) => {
            if status == Status::NotConverged {
                eprintln!("warning: estimator did not converge; results were written");
            }
            status.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
