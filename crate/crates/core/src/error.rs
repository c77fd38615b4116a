use thiserror::Error;

/// Errors surfaced by the library. Each variant maps onto one CLI exit class.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("position {pos} outside 1..={len}")]
    OutOfRange { pos: usize, len: usize },
    #[error("empty range [{a}, {b}]")]
    EmptyRange { a: usize, b: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("text is not sentinel-terminated")]
    MissingSentinel,
    #[error("prefix end {0} already present")]
    DuplicatePrefix(usize),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("candidate set exhausted: text has more than {z_max} factors")]
    CandidatesExhausted { z_max: usize },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
