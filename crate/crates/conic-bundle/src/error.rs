use thiserror::Error;

/// Crate-wide error type. Most arithmetic is total; errors mark contract
/// violations (degenerate inputs) or exhausted computation budgets.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pencil is degenerate: {0}")]
    DegeneratePencil(String),

    #[error("discriminant cubic vanishes identically")]
    IdenticallyZero,

    #[error("zero vector not allowed")]
    ZeroVector,

    #[error("operation requires a smooth pencil")]
    SmoothnessRequired,

    #[error("quartic factorization inconclusive after {0} coordinate changes")]
    FactorizationInconclusive(u32),

    #[error("no eligible pencil found in the search space")]
    NotFound,

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("factorization budget exceeded for {0}")]
    FactorizationBudget(String),

    #[error("odd prime required, got 2")]
    OddPrimeRequired,

    #[error("prime {0} is in the bad set for this check; skipped")]
    BadPrimeSkipped(u64),

    #[error("fiber is singular: C(y) = 0")]
    SingularFiber,

    #[error("quadratic form is singular")]
    SingularForm,

    #[error("direction not primitive modulo m")]
    NonPrimitiveDirection,

    #[error("point does not satisfy the surface equation")]
    NotOnSurface,

    #[error("pencil does not satisfy the eligibility hypotheses: {0}")]
    NotEligible(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
