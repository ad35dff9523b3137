use thiserror::Error;

/// Failure classes of the pipeline. Each maps onto one CLI exit code.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or inconsistent input (bad rationals, dimension mismatch,
    /// duplicate or nested atoms).
    #[error("input error: {0}")]
    Input(String),
    /// A configured size cap would be exceeded.
    #[error("cap exceeded: {0}")]
    Cap(String),
    /// An internal algebraic identity failed; carries the witness.
    #[error("consistency error: {0}")]
    Consistency(String),
    /// An operation's precondition does not hold for this input.
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::NotApplicable(_) => 1,
            Error::Cap(_) => 2,
            Error::Consistency(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
