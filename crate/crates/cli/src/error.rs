use std::fmt;
use std::process::ExitCode;

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad flags or config (exit 1).
    Input(String),
    /// The numerics broke down, e.g. a singular information matrix (exit 3).
    Numerical(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Input(_) => ExitCode::from(1),
            Self::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) => write!(f, "input error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<rank_garch::Error> for CliError {
    fn from(e: rank_garch::Error) -> Self {
        use rank_garch::Error as E;
        match e {
            E::SingularInformation { .. }
            | E::NonFiniteStep
            | E::NonPositiveVariance { .. }
            | E::OptimFailed(_)
            | E::QuadratureNotConverged(_)
            | E::TooManyFailures { .. }
            | E::AllReplicationsFailed => Self::Numerical(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// What a successful run reports through its exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Output was written but the estimator did not meet its tolerance (exit 2).
    NotConverged,
}

impl Status {
    pub fn exit_code(self) -> ExitCode {
        match self {
            Self::Ok => ExitCode::SUCCESS,
            Self::NotConverged => ExitCode::from(2),
        }
    }
}
