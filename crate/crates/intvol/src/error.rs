use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs are individually valid but incompatible (kind or dimension mismatch).
    #[error("usage error: {0}")]
    Usage(String),
    /// The request would exceed a hard enumeration limit.
    #[error("size error: {0}")]
    Size(String),
    /// A proven inequality failed numerically.
    #[error("numeric check failed: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
