use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("inverse temperature must be finite and positive, got {0}")]
    InvalidBeta(f64),
    #[error("target energy {target} outside the attainable range ({min}, {max})")]
    EnergyOutOfRange { target: f64, min: f64, max: f64 },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("support violation: first argument is positive where the second vanishes")]
    SupportViolation,
    #[error("constraint infeasible: {0}")]
    Infeasible(String),
    #[error("level-shift permutation not applicable: {0}")]
    IncompatiblePolicy(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("malformed spectrum document: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
