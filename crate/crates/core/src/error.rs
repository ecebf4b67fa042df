use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or lengths that must agree do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Smoothing configuration, threat model and data domain do not pair up.
    #[error("incompatible configuration: {0}")]
    Incompatible(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("classifier failed on draw {index}: {message}")]
    Classifier { index: u64, message: String },

    #[error("enumeration too large: {0}")]
    TooLarge(String),

    #[error("malformed record at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub(crate) fn incompatible(msg: impl Into<String>) -> Self {
        Error::Incompatible(msg.into())
    }
}
