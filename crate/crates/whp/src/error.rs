use thiserror::Error;

/// Error type shared by all library modules.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum WhpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix dimension {dim} exceeds the configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error(
        "matrix is not Hermitian: entries ({row},{col}) and ({col},{row}) differ by {deviation:e}"
    )]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NonConvergence { sweeps: usize, off: f64 },

    #[error("eigenvalue {value:e} is below the PSD clamping tolerance -{tol:e}")]
    NotPsd { value: f64, tol: f64 },

    #[error("simplex violation: {0}")]
    SimplexViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "nodes too close: minimum gap {gap:e} is below the separation threshold {threshold:e}"
    )]
    NodeCoalescence { gap: f64, threshold: f64 },

    #[error("no sign change of the objective on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("function evaluation failed on sample {sample:?}: {source}")]
    EvalFailure {
        sample: Vec<f64>,
        source: Box<WhpError>,
    },
}

pub type Result<T> = std::result::Result<T, WhpError>;
