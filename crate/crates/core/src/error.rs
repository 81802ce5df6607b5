use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("not divisible by t^{shift}: valuation is {valuation}")]
    NotDivisible { shift: usize, valuation: usize },
    #[error("coordinate change is not invertible over S (det valuation {0})")]
    NotUnit(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("weight system does not destabilize: mult {mult}, threshold {threshold}")]
    NotDestabilizing { mult: String, threshold: String },
    #[error("generic fiber is GIT-unstable (invariant vanishes identically)")]
    GitUnstable,
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("not a complete intersection: {0}")]
    NotCompleteIntersection(String),
    #[error("inconclusive dimension: {0}")]
    InconclusiveDimension(String),
    #[error("no fiber-improvement case matched: {0}")]
    CaseNotMatched(String),
    #[error("a formal section is required: {0}")]
    NeedsFormalSection(String),
    #[error("points are collinear")]
    CollinearPoints,
    #[error("genericity conditions not met after {0} draws")]
    GenericityExhausted(usize),
    #[error("tangent cone obstruction: {0}")]
    TangentConeObstruction(String),
    #[error("no point: {0}")]
    NoPoint(String),
    #[error("lifting depth {0} reached with live branches")]
    DepthExceeded(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("certificate check failed: {0}")]
    CertificateFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
