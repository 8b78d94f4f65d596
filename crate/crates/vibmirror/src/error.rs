use thiserror::Error;

/// Crate-wide error type. The three non-IO variants map onto the CLI exit
/// codes: domain and contract violations exit 1, config problems exit 2.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical quantity is outside its meaningful range (negative decay
    /// length, energetically forbidden order, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// An operation was called outside its validity contract (resolution,
    /// stability, or normalization preconditions).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Malformed or inconsistent run configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the CLI: 1 for domain/contract/io, 2 for config.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
