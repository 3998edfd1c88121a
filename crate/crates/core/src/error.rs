use thiserror::Error;

use crate::lp::LpError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("enumeration size {needed:.3e} exceeds budget {budget:.3e} ({what})")]
    Budget {
        what: String,
        needed: f64,
        budget: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("distortion threshold {d_max} is below the minimum achievable distortion {d_min}")]
    InfeasibleDistortion { d_max: f64, d_min: f64 },

    #[error("{what} did not converge after {iterations} iterations (last gap {gap:.3e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        gap: f64,
    },

    #[error("reproduction ball has zero probability for source sequence {0}")]
    DegenerateBall(usize),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),

    #[error("{0}")]
    Config(#[from] crate::model::config::ConfigError),
}
