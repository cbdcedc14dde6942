use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset generation failed: {0}")]
    GenerationFailure(String),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Ingest { path: PathBuf, message: String },

    #[error("problem too large for exhaustive search: {variables} variables (limit {limit})")]
    ProblemTooLarge { variables: usize, limit: usize },

    #[error("no support vectors: every multiplier is at or below {threshold:e}")]
    NoSupportVectors { threshold: f64 },

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag, used by the CLI's error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::GenerationFailure(_) => "generation-failure",
            Error::Io { .. } => "io",
            Error::Ingest { .. } => "ingest",
            Error::ProblemTooLarge { .. } => "problem-too-large",
            Error::NoSupportVectors { .. } => "no-support-vectors",
            Error::Serialization(_) => "serialization",
            Error::Csv(_) => "csv",
        }
    }
}
