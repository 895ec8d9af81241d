use alloc::string::String;
use core::fmt;

/// Errors raised by the core engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A configuration value is unknown or out of range.
    Config(String),
    /// An argument lies outside the domain an operation is defined on.
    Domain(String),
    /// An operation was invoked in the wrong order (e.g. update before sample).
    State(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::State(msg) => write!(f, "state error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
