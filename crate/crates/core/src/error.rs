use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {0} overflows double precision")]
    Overflow(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("Groebner budget exceeded after {pairs} pairs ({elements} basis elements)")]
    BudgetExceeded { pairs: usize, elements: usize },
    #[error("not a curve: {0}")]
    NotACurve(String),
    #[error("ideal is the unit ideal; the variety is empty")]
    EmptyVariety,
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("no convergence after {0} iterations")]
    NonConvergence(usize),
    #[error("rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("fiber over z1 = {0} is positive dimensional")]
    PositiveDimensionalFiber(String),
    #[error("clustered eigenvalues (separation {0:.3e}); possible multiple point")]
    ClusteredEigenvalues(f64),
    #[error("residual violation: {0}")]
    ResidualViolation(String),
    #[error("compact set is empty")]
    EmptySet,
    #[error("T1 vanishes at direction {0}")]
    T1Vanishes(usize),
    #[error("input error: {0}")]
    Input(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
