use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or sequence dimensions that do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// A numeric argument outside its allowed range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A model or pipeline configuration that cannot be honored.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not found: {0}")]
    Lookup(String),

    #[error("malformed one-hot row: {0} bits set")]
    MalformedRow(usize),

    #[error("significance undefined for {0:?}: term matches no tweets")]
    UndefinedSignificance(String),

    #[error("{0}")]
    EmptyInput(String),

    #[error("duplicate tweet id {0:?}")]
    DuplicateId(String),

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("unsupported model container version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("model container truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("model container corrupt: {0}")]
    Corrupt(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable snake_case identifier for machine-readable error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Parameter(_) => "parameter",
            Error::Config(_) => "config",
            Error::Lookup(_) => "lookup",
            Error::MalformedRow(_) => "malformed_row",
            Error::UndefinedSignificance(_) => "undefined_significance",
            Error::EmptyInput(_) => "empty_input",
            Error::DuplicateId(_) => "duplicate_id",
            Error::Format { .. } => "format",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::Truncated { .. } => "truncated",
            Error::Corrupt(_) => "corrupt",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
