use thiserror::Error;

use crate::network::ArchitectureError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed image or model header.
    #[error("format error: {0}")]
    Format(String),

    /// Fewer samples or parameters than the header declares.
    #[error("truncated input: {0}")]
    Truncation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A value lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected}, got {actual} ({context})")]
    Shape {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("unsupported file version: {0}")]
    Version(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Architecture(#[from] ArchitectureError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(expected: usize, actual: usize, context: &'static str) -> Self {
        Error::Shape {
            expected,
            actual,
            context,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
