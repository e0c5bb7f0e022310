use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid vertex: {0}")]
    InvalidVertex(String),
    #[error("invalid quotient state: {0}")]
    InvalidState(String),
    #[error("bias must be nonnegative, got {0}")]
    NegativeBias(f64),
    #[error("bias must be positive, got {0}")]
    NonpositiveBias(f64),
    #[error("ball of radius {radius} has {count} vertices, cap is {cap}")]
    BallTooLarge { radius: usize, count: u128, cap: usize },
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("|z| = {z} is outside the radius of convergence {radius}")]
    OutsideRadius { z: f64, radius: f64 },
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("bisection target changes sign {changes} times on [{lo}, {hi}]")]
    MultipleRoots { changes: usize, lo: f64, hi: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("inconclusive: z-score {z_score:.3} below 3, increase replicas")]
    Inconclusive { z_score: f64 },
    #[error("condition violated: {0}")]
    ConditionViolated(String),
}
