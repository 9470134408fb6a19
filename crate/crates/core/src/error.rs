use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The caller passed a value outside the operation's contract
    /// (shape mismatch, out-of-range parameter, non-PSD state, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The inputs are well-formed but the requested quantity does not exist
    /// for them (vanishing normalization, undefined specific time, ...).
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
