use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("system must have at least one unknown")]
    Empty,

    #[error("non-finite entry in {0}")]
    NonFiniteInput(&'static str),

    #[error("diagonal entry a[{row}][{row}] is zero")]
    ZeroDiagonal { row: usize },

    /// A computation produced NaN or an infinity. Solvers treat this as divergence.
    #[error("arithmetic overflow (non-finite value)")]
    Overflow,

    #[error("matrix is numerically singular (zero pivot in column {column})")]
    Singular { column: usize },

    #[error("spectral radius estimate did not converge after {iterations} iterations (best estimate {best})")]
    SpectralEstimate { best: f64, iterations: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed problem file: {0}")]
    Structure(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
