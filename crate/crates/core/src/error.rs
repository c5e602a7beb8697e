use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Hilbert space: dimension {dim} (need at least 2)")]
    InvalidSpace { dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state has zero norm: {0}")]
    EmptyState(String),

    #[error("space of dimension {dim} exceeds the limit of {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t:e}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("{kind} invariant breached at t = {time:e}: {value:e}")]
    InvariantBreach {
        kind: &'static str,
        time: f64,
        value: f64,
    },

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("time grids differ")]
    GridMismatch,
}
