use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operand shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A well-typed but structurally unusable input (non-square system, unbounded polytope, ...).
    #[error("structural error: {0}")]
    Structural(String),
    /// An operation was called outside its stated domain (e.g. asymmetric loss).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A combinatorial cap was exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A loss matrix or probability vector failed validation.
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
