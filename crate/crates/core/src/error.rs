use thiserror::Error;

/// Errors raised by the numerical and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A structurally invalid argument (empty grid, bad ordering, unknown name).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A request beyond the supported numerical range.
    #[error("range error: {0}")]
    Range(String),
    /// A consistency check on derived data failed.
    #[error("consistency error: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
