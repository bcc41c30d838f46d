use thiserror::Error;

/// Errors raised by every layer of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pole: {0}")]
    Pole(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("tolerance not met: {0}")]
    Tolerance(String),

    #[error("missing A-value for q={q} (derivative: {deriv})")]
    MissingA { q: f64, deriv: bool },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<S: Into<String>>(msg: S) -> Error {
    Error::Precondition(msg.into())
}
