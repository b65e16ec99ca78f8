use std::path::PathBuf;

/// Error taxonomy shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at {location}")]
    NonFiniteValue { location: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    /// The quantile bounds crossed, so the prediction set is empty. Only
    /// possible for `alpha > 1/2`.
    #[error("empty prediction set: lower quantile {lower} exceeds upper quantile {upper}")]
    EmptySet { lower: f64, upper: f64 },

    #[error("unsupported conformity score: {0}")]
    UnsupportedScore(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("parse error at row {row}, column {column:?}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_invalid(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}
