use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("rate `{name}` must be finite and nonnegative, got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("a ring needs at least 2 cavities, got {0}")]
    RingTooSmall(usize),
    #[error("generator dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid qubit state: {0}")]
    InvalidState(&'static str),
    #[error("survival amplitude modulus {0} exceeds 1")]
    AmplitudeOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("initial vector has length {found}, generator dimension is {expected}")]
    InitialDimension { expected: usize, found: usize },
    #[error("initial vector must have unit norm, got {0}")]
    InitialNorm(f64),
    #[error("state norm grew to {norm} at t = {t}")]
    NormGrowth { t: f64, norm: f64 },
    #[error("integrator failed to reach tolerance at t = {t} (step {step:e})")]
    NonConvergence { t: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("horizon tau = {tau} outside trajectory span [0, {t_end}]")]
    HorizonOutOfRange { tau: f64, t_end: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),
    #[error("invalid bracket ({lo}, {hi})")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("failed to build worker pool: {0}")]
    WorkerPool(String),
}
