use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("minimal polynomial is not squarefree (common factor with derivative: {0})")]
    NotSquarefree(String),
    #[error("root interval ({lo}, {hi}) contains {count} real roots, expected exactly one")]
    RootCount { lo: String, hi: String, count: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero divisor: minimal polynomial is reducible, shares factor {factor}")]
    ZeroDivisor { factor: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("matrix is not {0}")]
    Shape(&'static str),
    #[error("polynomial degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },
    #[error("nonzero constant term in translated log map")]
    NonzeroConstant,
    #[error("subspace is not bracket-closed")]
    NotSubalgebra,
    #[error("lie algebra has irrational structure constants")]
    IrrationalStructure,
    #[error("element does not lie in the group")]
    NotInGroup,
    #[error("image of the map does not lie in the group")]
    ImageNotInGroup,
    #[error("subalgebra is not contained in the ambient group algebra")]
    NotContained,
    #[error("rational closure leaves the ambient algebra; ambient algebra is not rational")]
    ClosureExceedsGroup,
    #[error("curve has non-integer or negative exponents")]
    NonPolynomialCurve,
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("quadrature did not converge within {budget} evaluations (achieved error {achieved:e})")]
    Quadrature { budget: u64, achieved: f64 },
    #[error("overflow evaluating at parameter {param:?}")]
    Overflow { param: Vec<f64> },
    #[error("invalid sample plan: {0}")]
    InvalidPlan(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
