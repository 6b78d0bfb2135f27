//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by state construction, protocol execution, and reporting.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension or count parameter is outside its legal range.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// Two objects that must share a shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A construction would exceed the configured sparse-support budget.
    #[error("resource budget exceeded: {what} needs {required} terms, budget is {budget}")]
    ResourceBudget {
        what: String,
        required: usize,
        budget: usize,
    },

    /// A sequence that must have all-distinct entries has a repeat.
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    /// A state that must be normalized is not.
    #[error("state not normalized: norm² = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    /// A matrix that must be unitary is not.
    #[error("matrix not unitary: max deviation {deviation}")]
    NotUnitary { deviation: f64 },

    /// An operation was invoked out of protocol order.
    #[error("sequencing error: {0}")]
    Sequencing(String),

    /// A checker asked for more test rows than remain.
    #[error("insufficient rows: need {needed}, only {available} untested")]
    InsufficientRows { needed: usize, available: usize },

    /// The simultaneous broadcast never completed.
    #[error("broadcast timeout: voters {missing:?} never submitted")]
    BroadcastTimeout { missing: Vec<usize> },

    /// Bad scenario/config input.
    #[error("validation error: {0}")]
    Validation(String),

    /// Filesystem or serialization failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
