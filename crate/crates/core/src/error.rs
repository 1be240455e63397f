use std::io;

use thiserror::Error;

use crate::cipher::KeyFault;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("block size {0} outside the supported range 1..=16")]
    BlockSizeOutOfRange(usize),

    #[error("matrix is not invertible over Z_256 (even determinant)")]
    NotInvertible,

    #[error("invalid key: {0}")]
    InvalidKey(KeyFault),

    #[error("bit flip target out of range: {0}")]
    FlipOutOfRange(String),

    #[error("need at least {needed} plaintext/ciphertext pairs, got {got}")]
    TooFewPairs { needed: usize, got: usize },

    #[error("unrecoverable: {0}")]
    Unrecoverable(String),

    #[error("bad PGM magic (expected P5)")]
    BadMagic,

    #[error("unsupported PGM maxval {0} (only 255 is accepted)")]
    BadMaxval(u32),

    #[error("PGM payload truncated: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Variant name, used as the stable tag in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::BlockSizeOutOfRange(_) => "BlockSizeOutOfRange",
            Error::NotInvertible => "NotInvertible",
            Error::InvalidKey(_) => "InvalidKey",
            Error::FlipOutOfRange(_) => "FlipOutOfRange",
            Error::TooFewPairs { .. } => "TooFewPairs",
            Error::Unrecoverable(_) => "Unrecoverable",
            Error::BadMagic => "BadMagic",
            Error::BadMaxval(_) => "BadMaxval",
            Error::TruncatedPayload { .. } => "TruncatedPayload",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
