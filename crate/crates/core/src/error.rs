//! Error type shared across the crate.

use thiserror::Error;

/// All failures the library can report.
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shapes or field layouts do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// An argument is outside its valid domain.
    #[error("invalid input: {0}")]
    Domain(String),

    /// A configuration value or combination is not allowed.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller broke an API contract (e.g. missing gradients).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Checkpoint or dataset bytes are malformed. `offset` is the byte
    /// position at which decoding failed.
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
    pub fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format { offset, msg: msg.into() }
    }
}
