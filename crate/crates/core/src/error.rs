//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the laboratory.
///
/// `Invalid` covers malformed arguments (a sigma on the critical line, a
/// cutoff that exceeds the supplied table, a root index above 2).
/// `Capacity` covers requests that are well formed but exceed the configured
/// enumeration or streaming limits, so the caller can distinguish "wrong"
/// from "too big".  `Domain` covers evaluation points outside the
/// mathematical domain of an operation (a ramified prime where an unramified
/// one is required, a CDF query off the grid, a pole hit).
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
