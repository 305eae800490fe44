use thiserror::Error;

/// Errors raised by the simulator and the capacity engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("storage loop misuse: {0}")]
    MemoryUsage(String),

    /// The capacity curve never crosses zero on the searched interval.
    #[error("no threshold: {0}")]
    NoThreshold(String),

    /// The required channel transmittance exceeds one.
    #[error("unreachable: required channel transmittance {required:.6} exceeds 1")]
    Unreachable { required: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
