use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("invalid leaf labels: {0}")]
    Leaves(String),
    #[error("invalid generator: {0}")]
    Generator(String),
    #[error("inhomogeneous element: {0}")]
    Inhomogeneous(String),
    #[error("zero element has no leading term")]
    ZeroElement,
    #[error("bound exceeded: {0}")]
    Bound(String),
    #[error("occurrence does not match: {0}")]
    Occurrence(String),
    #[error("not a permutation: {0}")]
    Permutation(String),
    #[error("element is not a cycle: {0}")]
    NotCycle(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
