use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid sphere parameters: {0}")]
    InvalidSphere(String),

    #[error("quadrature resolution error: {0}")]
    QuadratureResolution(String),

    #[error("amplitude set kind error: {0}")]
    Kind(String),

    #[error("consistency error: {what} diverges by {divergence:e} (limit {limit:e})")]
    Consistency { what: String, divergence: f64, limit: f64 },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
