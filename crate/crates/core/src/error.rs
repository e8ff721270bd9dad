use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad magic: expected `UPRF`, found {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),

    #[error("unknown dtype code {0}")]
    UnknownDtype(u8),

    #[error("truncated input: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("dimensions {width}x{height}x{bands} overflow the addressable size")]
    DimensionOverflow { width: u32, height: u32, bands: u32 },

    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),

    #[error("non-finite value at element {0}")]
    NonFinite(usize),

    #[error("transform file line {line}: {msg}")]
    TransformParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
