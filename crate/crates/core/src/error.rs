use thiserror::Error;

/// Errors raised by the geometry, resolvent, checker, rate and engine layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A point lies outside the model of its space (e.g. `y <= 0` in the half-plane).
    #[error("domain error: {0}")]
    Domain(String),
    /// An iteration failed to converge or an integer bound overflowed its cap.
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    /// A finite step schedule ran out before its partial sums reached the target.
    #[error("insufficient schedule: partial sums reach at most {max_reachable}, needed {target}")]
    InsufficientSchedule { target: f64, max_reachable: f64 },
    /// A sequence or trace is too short to decide the requested property.
    #[error("sequence too short: need at least {required} entries, have {available}")]
    InsufficientLength { required: usize, available: usize },
    /// A fixed-set descriptor has no computable nearest-point projection.
    #[error("unsupported set: {0}")]
    UnsupportedSet(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
