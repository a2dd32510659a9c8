use thiserror::Error;

/// Errors raised by the finite-level constructions.
///
/// `Domain` and `Parse` are caller mistakes (bad input, violated
/// precondition); `Construction` and `Numeric` mean the inputs were valid
/// but the requested object could not be certified.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// True for errors caused by invalid input rather than failed numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
