use thiserror::Error;

/// Errors produced by grid, group, energy and solver operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("mass mismatch: expected {expected}, found {found}")]
    MassMismatch { expected: f64, found: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("misconfigured property {id}: {reason}")]
    Misconfigured { id: String, reason: String },
    #[error("diverged: {0}")]
    Diverged(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
