//! Crate-wide error type.

use std::fmt;

/// Errors produced by domain construction, model fitting and the solver.
#[derive(Debug)]
pub enum Error {
    /// Invalid domain or variable specification.
    Domain(String),
    /// A point or component does not belong to the domain it is used with.
    Point(String),
    /// Invalid solver or model configuration.
    Config(String),
    /// Not enough (finite) data to fit a model.
    InsufficientData(String),
    /// A numerical routine failed (e.g. Cholesky after jitter escalation).
    Numerical(String),
    /// Failed to parse a file or an encoded value.
    Parse(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
    /// External blackbox process could not be started.
    Process(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "invalid domain: {msg}"),
            Error::Point(msg) => write!(f, "invalid point: {msg}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
            Error::Process(msg) => write!(f, "blackbox process error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

/// Crate-specific result type.
pub type Result<T> = std::result::Result<T, Error>;
