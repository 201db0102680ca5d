use thiserror::Error;

/// Errors raised by the regression, filtering, planning and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("matrix is not positive definite ({0})")]
    Factorization(&'static str),

    #[error("duplicate point at index {0} under a noise-free subset-of-regressors kernel")]
    DuplicatePoints(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation requires a conditionally independent (SoR/FIC) kernel")]
    NotConditionallyIndependent,

    #[error("non-positive innovation variance {0}")]
    NumericalBreakdown(f64),

    #[error("node {0} is not attached to the search tree")]
    DetachedNode(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
