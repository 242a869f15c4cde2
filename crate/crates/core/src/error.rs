use thiserror::Error;

/// Unified error type: configuration problems, contract violations, IO.
#[derive(Debug, Error)]
pub enum Error {
    /// An invalid configuration value; the message names the offending field.
    #[error("config: {0}")]
    Config(String),
    /// An operation was called outside its contract.
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
