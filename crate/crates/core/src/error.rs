use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OskError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(char),
    #[error("trivial element has no conjugacy class")]
    Trivial,
    #[error("invalid marked graph: {0}")]
    InvalidGraph(String),
    #[error("graph is not normalized (volume {0})")]
    NotNormalized(String),
    #[error("edge subset contains a cycle")]
    NotAForest,
    #[error("graph is a tree")]
    Tree,
    #[error("disconnected Whitehead graph")]
    Disconnected,
    #[error("class is not simple")]
    NotSimple,
    #[error("generator is not primitive")]
    NotPrimitive,
    #[error("operation requires rank {expected}, got {actual}")]
    Rank { expected: String, actual: usize },
    #[error("optimal map search failed: {0}")]
    Convergence(String),
    #[error("folding failed: {0}")]
    Folding(String),
    #[error("time {0} out of range")]
    TimeOutOfRange(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("certificate rejected: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, OskError>;
