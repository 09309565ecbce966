use thiserror::Error;

use crate::geometry::NonGeneric;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("non-generic projection: {0}")]
    NonGeneric(NonGeneric),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0} is not divisible by q + q^-1")]
    NotDivisible(String),
}

impl From<NonGeneric> for Error {
    fn from(e: NonGeneric) -> Self {
        Error::NonGeneric(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
