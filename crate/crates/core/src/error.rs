use thiserror::Error;

/// Errors reported by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid interval: lower bound {lo} must lie below upper bound {hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid threshold quad: {0}")]
    InvalidQuad(String),

    #[error(
        "circulant embedding of size {size} is not nonnegative definite: \
         eigenvalue {min_eigenvalue:.6e} lies below the tolerance -{tolerance:.6e}"
    )]
    EmbeddingFailure {
        size: usize,
        min_eigenvalue: f64,
        tolerance: f64,
    },

    #[error("length mismatch: path holds {path_len} values, indicators hold {indicator_len}")]
    LengthMismatch {
        path_len: usize,
        indicator_len: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
