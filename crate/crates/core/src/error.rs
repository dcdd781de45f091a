use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    /// An input violated a documented invariant.
    #[error("invalid {field}: {constraint}")]
    Validation { field: String, constraint: String },

    #[error("dimension {requested} exceeds the configured cap of {cap}")]
    Capacity { requested: u128, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Attempted to collapse onto an outcome whose Born probability is
    /// (numerically) zero.
    #[error("outcome has probability {probability:e}, below the collapse threshold")]
    ZeroProbabilityBranch { probability: f64 },

    /// The post-selected final outcome cannot follow any intermediate outcome.
    #[error("impossible post-selection: total weight {denominator:e}")]
    ImpossiblePostSelection { denominator: f64 },

    /// An operation was called outside its documented domain.
    #[error("contract violated: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), constraint: constraint.into() }
    }
}
