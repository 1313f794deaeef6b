use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A specification violates one of its invariants.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    /// An argument falls outside the operation's domain.
    #[error("domain violation: {0}")]
    Domain(String),
    /// Array shapes do not match.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// The request is valid but not supported by this implementation.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A numeric routine failed to produce a usable value.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Configuration could not be parsed or validated. Every violation is listed.
    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
