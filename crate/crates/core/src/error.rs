use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its admissible range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("square-root factorization failed: {0}")]
    FactorizationFailure(String),

    #[error("negative RF power {0} mW")]
    NegativeInput(f64),

    #[error("power {0} mW must be strictly positive to express in dBm")]
    NonPositive(f64),

    #[error("distance {0} m must be strictly positive")]
    NonPositiveDistance(f64),

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("phase search exceeded its budget of {sweeps} sweeps")]
    BudgetExceeded { sweeps: usize },

    #[error("histograms have different bin edges")]
    EdgeMismatch,

    #[error("no correlation matrix found for R_sum = {target} after {retries} retries")]
    Infeasible { target: f64, retries: usize },

    #[error("candidate plan set is empty")]
    EmptyCandidateSet,
}
