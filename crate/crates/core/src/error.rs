use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("weight parameter must satisfy alpha > -1, got {0}")]
    InvalidAlpha(f64),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("invalid axes ({i}, {j}) in dimension {d}")]
    InvalidAxes { i: usize, j: usize, d: usize },

    #[error("angular derivatives are undefined in dimension 1")]
    AngularUndefined,

    #[error("polynomial degree {degree} exceeds basis degree {max}")]
    DegreeExceedsBasis { degree: i64, max: usize },

    #[error(
        "orthonormality certificate {certificate:e} above tolerance {tolerance:e} at the {bits}-bit precision cap"
    )]
    PrecisionExhausted {
        certificate: f64,
        tolerance: f64,
        bits: u32,
    },

    #[error("quadrature exactness {available} below the required {required}")]
    InsufficientExactness { available: usize, required: usize },

    #[error("derivatives of order {requested} unavailable (oracle supplies up to {available})")]
    MissingDerivative { requested: usize, available: usize },

    #[error("weight mismatch: {0}")]
    WeightMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
