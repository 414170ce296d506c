//! Estimators and validation harnesses.

pub mod covariance;
pub mod dependence;
pub mod mc;
pub mod spectrum;
pub mod validation;

pub use covariance::{empirical_covariance, Experiment, Formula};
pub use dependence::{dependence_range_diagnostic, log_lags, DependenceDiagnostic, DependenceVerdict};
pub use mc::{estimate_mean, estimate_means, McEstimate, Welford};
pub use spectrum::estimate_power_spectrum;
pub use validation::{run_validation_suite, Check, Suite, ValidationReport};
