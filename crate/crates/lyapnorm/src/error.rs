//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI maps them to exit codes: configuration
//! and validation problems exit with 2, numeric failures (CFL, underflow,
//! non-convergence) with 3, and missing or partial result sets with 4.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or argument values (CLI exit code 2).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Shape/grid mismatches between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Numeric failure during a solve or estimate (CLI exit code 3).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A results directory is missing pieces (CLI exit code 4).
    #[error("incomplete results: {0}")]
    MissingResults(String),

    /// Malformed checkpoint file (CLI exit code 3).
    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    TomlParse(#[from] toml::de::Error),

    #[error("config encode error: {0}")]
    TomlEncode(#[from] toml::ser::Error),

    #[error("artifact serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Shape(_) | Error::TomlParse(_) | Error::TomlEncode(_) => 2,
            Error::Numeric(_) | Error::Checkpoint(_) => 3,
            Error::MissingResults(_) => 4,
            Error::Io(_) | Error::Json(_) => 3,
        }
    }
}
