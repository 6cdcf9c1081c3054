use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter {name} = {value} must be strictly positive")]
    NonPositiveParameter { name: String, value: f64 },

    #[error("stationarity violated: persistence {persistence} >= 1")]
    NonStationary { persistence: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported model specification: {0}")]
    UnsupportedSpec(String),

    #[error("non-positive conditional variance at t = {t}")]
    NonPositiveVariance { t: usize },

    #[error("argument {0} outside the open unit interval")]
    DomainError(f64),

    #[error("non-finite input at index {0}")]
    NonFiniteInput(usize),

    #[error("insufficient data: {n} observations for {m} parameters")]
    InsufficientData { n: usize, m: usize },

    #[error("information matrix is singular (condition estimate {condition:e})")]
    SingularInformation { condition: f64 },

    #[error("Newton step produced non-finite values")]
    NonFiniteStep,

    #[error("initial estimator failed: {0}")]
    InitFailed(String),

    #[error("series is degenerate (mean square is zero)")]
    DegenerateSeries,

    #[error("sum of beta coefficients {0} is not below one")]
    ExplosiveBeta(f64),

    #[error("optimizer failed: {0}")]
    OptimFailed(String),

    #[error("student-t degrees of freedom must exceed 2, got {0}")]
    InvalidDf(f64),

    #[error("too many bootstrap replicates failed: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error("need at least {needed} bootstrap replicates, got {got}")]
    InsufficientReplicates { needed: usize, got: usize },

    #[error("quadrature did not converge (error estimate {0:e})")]
    QuadratureNotConverged(f64),

    #[error("fourth moment of the innovation distribution is infinite")]
    InfiniteFourthMoment,

    #[error("all Monte Carlo replications failed")]
    AllReplicationsFailed,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
