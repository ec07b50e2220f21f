use thiserror::Error;

/// Errors raised by the signal-processing, quantizer and training layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Bitstream parsing failure, carrying the byte offset where it was detected.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{kind} (at byte {offset})")]
pub struct DecodeError {
    pub kind: DecodeErrorKind,
    pub offset: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeErrorKind {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("header checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("truncated header")]
    TruncatedHeader,
    #[error("truncated body: expected {expected} codes, found room for {actual}")]
    TruncatedBody { expected: u64, actual: u64 },
    #[error("trailing bytes after body")]
    TrailingBytes,
    #[error("malformed config block: {0}")]
    BadConfig(String),
}

impl DecodeError {
    pub(crate) fn new(kind: DecodeErrorKind, offset: usize) -> Self {
        Self { kind, offset }
    }
}
