use alloc::string::String;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("budget exceeded: {what} needs {needed} points, cap is {cap}")]
    Budget {
        what: &'static str,
        needed: u128,
        cap: u64,
    },
    #[error("quadrature did not converge at frequency {0}")]
    Quadrature(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn hypothesis(msg: impl Into<String>) -> Error {
    Error::Hypothesis(msg.into())
}
