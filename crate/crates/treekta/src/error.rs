//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model fitting, linear algebra and data handling.
#[derive(Debug, Error)]
pub enum Error {
    /// A tree was asked to fit an empty set of rows.
    #[error("empty node")]
    EmptyNode,

    /// The dataset has zero feature columns.
    #[error("no features")]
    NoFeatures,

    /// Too few rows for the requested fit.
    #[error("insufficient data: need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// A configuration value violates its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Matrix/vector shapes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Input to the symmetric eigensolver is not symmetric.
    #[error("matrix is not symmetric")]
    NotSymmetric,

    /// Cholesky factorization failed; the (ridged) matrix is not positive
    /// definite. Consumed by the ridge-grid searches in `krr` and `landmark`.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// No ridge value in the search grid produced a usable factorization.
    #[error("kernel unusable")]
    KernelUnusable,

    /// Landmark design matrix carries no information (all zeros).
    #[error("degenerate design")]
    DegenerateDesign,

    /// A CSV cell could not be parsed; locations are 1-based.
    #[error("csv parse error at row {row}, column {col}: {message}")]
    CsvParse {
        row: usize,
        col: usize,
        message: String,
    },

    /// Malformed CSV structure or schema violation.
    #[error("csv format error: {0}")]
    CsvFormat(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
