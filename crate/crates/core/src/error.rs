use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{policy} has no model under {traffic} traffic")]
    UnsupportedCombination { policy: String, traffic: String },

    #[error("moment generating function has a pole at s = {s} (smallest branch rate {rate})")]
    MgfPole { s: f64, rate: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("request rate equations are singular: {0}")]
    SingularRouting(String),

    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },

    #[error("catalog of {requested} objects exceeds the configured bound of {bound}")]
    CatalogTooLarge { requested: usize, bound: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
