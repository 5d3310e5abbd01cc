use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A measure or board whose structure does not fit the operation.
    #[error("structure error: {0}")]
    Structure(String),

    /// Exact enumeration would exceed the configured work budget.
    #[error("resource error: {terms} enumeration terms exceed the budget of {budget}; use the Monte Carlo estimator")]
    Resource { terms: u128, budget: u128 },

    /// Sample points sharing an x or y coordinate.
    #[error("tie error: points {first} and {second} share a coordinate")]
    Tie { first: usize, second: usize },

    #[error("shape error: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    /// A precondition that upstream validation should have guaranteed.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("precondition error: {0}")]
    Precondition(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
