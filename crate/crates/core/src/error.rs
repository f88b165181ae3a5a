use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate commit id `{0}`")]
    DuplicateCommit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate tail: {0}")]
    DegenerateTail(String),

    #[error("insufficient tail: need at least {need} tail points, got {got}")]
    InsufficientTail { need: usize, got: usize },

    #[error("degenerate design: no variance in ln n")]
    DegenerateDesign,

    #[error("measure unavailable for commit `{commit}`: {reason}")]
    MeasureUnavailable { commit: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
