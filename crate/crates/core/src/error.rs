use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension {0} is outside the supported range 1..={max}", max = crate::MAX_DIM)]
    Dimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("covariance matrix is not symmetric positive definite")]
    NotSpd,
    #[error("reflection matrix is not completely-S (principal submatrix {0:?} admits no v >= 0 with Gv > 0)")]
    NotCompletelyS(Vec<usize>),
    #[error("reflection matrix is not a nonsingular M-matrix")]
    NotMMatrix,
    #[error("drift component {0} is not strictly negative")]
    DriftNotNegative(usize),
    #[error("reflection matrix has a nonpositive diagonal entry at {0}")]
    NonPositiveDiagonal(usize),
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReflectError {
    #[error("no complementary solution found for the reflection LCP")]
    NoSolution,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Reflect(#[from] ReflectError),
    #[error("path did not stop within {0} steps")]
    Timeout(u64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VpError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("2-D positive recurrence condition violated")]
    RecurrenceViolated,
    #[error("points violate the face condition: {0}")]
    ConditionViolated(String),
    #[error("no active subset satisfies the optimality conditions")]
    NoJStar,
    #[error("local cost {cost:e} along direction {direction:?} on face {face:?} is not positive")]
    DegenerateCost {
        face: Vec<usize>,
        direction: Vec<f64>,
        cost: f64,
    },
    #[error("direction set is empty: the face is the whole index set")]
    EmptySet,
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("at least two samples are needed for a standard error")]
    InsufficientSamples,
    #[error("estimate for n = {0} is not positive")]
    NonPositiveEstimate(u32),
    #[error("particle cap of {0} exceeded")]
    ParticleCapExceeded(usize),
    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Reflect(#[from] ReflectError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Vp(#[from] VpError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}
