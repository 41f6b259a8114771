//! Library-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any operation in this crate.
#[derive(Debug, Error)]
pub enum HydeError {
    /// Invalid argument or configuration value.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Array/cube dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// Payload contains values the library cannot work with (NaN, Inf, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A container header is missing, malformed, or names an unsupported layout.
    #[error("format error: {0}")]
    Format(String),

    /// Header and payload disagree (e.g. byte counts).
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Filesystem failure, annotated with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A denoising method failed to produce a result.
    #[error("method failure: {0}")]
    Method(String),
}

impl HydeError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HydeError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 usage/parameter, 3 data/format, 4 method failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HydeError::Parameter(_) | HydeError::Shape(_) => 2,
            HydeError::Data(_)
            | HydeError::Format(_)
            | HydeError::Integrity(_)
            | HydeError::Io { .. } => 3,
            HydeError::Method(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, HydeError>;
