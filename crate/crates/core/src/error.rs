use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("coefficient of T^{0} is not divisible by the requested scalar")]
    NonDivisible(usize),
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("element is not a unit (valuation {0})")]
    NonUnit(i64),
    #[error("operands live in different fields")]
    ContextMismatch,
    #[error("invalid field context: {0}")]
    InvalidContext(String),
    #[error("cannot parse p-adic input: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PsiError {
    #[error("fixed-point iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),
    #[error("compositional inverse has a non-integral coefficient at degree {0}")]
    NonIntegralInverse(usize),
    #[error("series arithmetic failed: {0}")]
    Series(#[from] SeriesError),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("every valuation is infinite")]
    AllInfinite,
    #[error("polygon has no vertices")]
    Empty,
    #[error("wrong polygon kind for this operation")]
    WrongKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WittError {
    #[error("non-integral division in the ghost recursion at index {0}")]
    NonIntegral(usize),
    #[error("Witt vectors live over different rings")]
    RingMismatch,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("operation unsupported over this ring: {0}")]
    UnsupportedRing(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("series truncation too small: degree {needed} needed, {available} available")]
    InsufficientSeriesTruncation { needed: usize, available: usize },
    #[error("input precision too small: {0}")]
    InsufficientInputPrecision(String),
    #[error("Newton iteration stalled at residual valuation {0}")]
    NewtonStall(i64),
    #[error("derivative is not invertible at the current precision")]
    DerivativeNotUnit,
    #[error("expected {expected} zeros, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("digit is zero; the Teichmüller limit is degenerate")]
    ZeroDigit,
    #[error("this check requires f = 1")]
    RequiresPrimeField,
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Psi(#[from] PsiError),
}
