use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid token {token:?}: {reason}")]
    InvalidToken { token: String, reason: String },

    #[error("pattern is empty")]
    EmptyPattern,

    #[error("pattern frequency must be at least 1")]
    ZeroFrequency,

    #[error("identification segments ({prefix} + {suffix}) exceed pattern length {len}")]
    Segmentation {
        prefix: usize,
        suffix: usize,
        len: usize,
    },

    #[error("duplicate pattern: identical to pattern {existing}")]
    DuplicatePattern { existing: u32 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("illegal alignment: {0}")]
    Legality(String),

    #[error("alignment shares nothing between its rows")]
    NothingShared,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
