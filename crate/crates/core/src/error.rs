//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("block size mismatch: {left} bits vs {right} bits")]
    SizeMismatch { left: usize, right: usize },

    #[error("zero has no multiplicative inverse")]
    DivisionByZero,

    #[error("run randomizer must be nonzero")]
    InvalidRandom,

    #[error("embed offset {offset} outside 1..={max}")]
    OffsetOutOfRange { offset: usize, max: usize },

    #[error("octet slice [{offset}..{offset}+{len}) outside block of {block_octets} octets")]
    SliceOutOfRange {
        offset: usize,
        len: usize,
        block_octets: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed block: fewer than two marker bits set")]
    MalformedBlock,

    #[error("incomplete stream: {0} dangling bits")]
    IncompleteStream(usize),

    #[error("incomplete message: final group block never arrived")]
    IncompleteMessage,

    #[error("bad magic, expected {expected:?}")]
    BadMagic { expected: [u8; 4] },

    #[error("unsupported format version {0}")]
    BadVersion(u8),

    #[error("truncated input: {context}")]
    Truncated { context: &'static str },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("missing packet: seq {0} never arrived")]
    MissingPacket(u64),

    #[error("insufficient capture: round {0} incomplete")]
    InsufficientCapture(u64),

    #[error("operation-count domain error: {0}")]
    CountDomain(String),
}
