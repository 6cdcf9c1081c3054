//! Monte Carlo drivers and diagnostics.

pub mod coverage;
pub mod functionals;
pub mod mc;
pub mod qq;

pub use coverage::{coverage_experiment, CoverageDesign, CoverageReport};
pub use functionals::{are_sign_vs_qmle, score_functionals, ScoreFunctionals};
pub use mc::{mc_study, McDesign, McStudyReport};
pub use qq::{qq_data, QqPoint};
