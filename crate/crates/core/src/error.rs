use std::path::PathBuf;

use thiserror::Error;

use crate::linprog::LpStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("polytope is empty")]
    EmptyPolytope,

    /// The LP did not reach an optimum; carries the status it stopped with.
    #[error("linear program is not optimal: {0}")]
    NotOptimal(LpStatus),

    /// A bounded, nonempty body was required.
    #[error("expected a bounded nonempty body, got status {0}")]
    NotABody(&'static str),

    #[error("simplex failure: {0}")]
    SolverFailure(String),

    #[error("x = {x} outside the valid interval [{lo}, {hi})")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("threshold {threshold:e} does not fit in a 64-bit count")]
    Capacity { threshold: f64 },

    #[error("rejection sampler acceptance rate {rate:e} below 1e-4")]
    DegeneratePolytope { rate: f64 },

    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    #[error("level set is empty or degenerate: {0}")]
    EmptyOrDegenerate(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
