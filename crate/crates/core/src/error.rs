use thiserror::Error;

/// Errors surfaced by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric: max asymmetry {max_asym:e} exceeds tolerance")]
    NotSymmetric { max_asym: f64 },

    #[error("matrix could not be factorized (jitter escalated to {jitter_tried:e})")]
    NotFactorizable { jitter_tried: f64 },

    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("eigenvalue iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty data: {0}")]
    EmptyData(&'static str),

    #[error("predictor evaluation failed: {0}")]
    EvaluationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
