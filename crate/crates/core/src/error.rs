use thiserror::Error;

/// Errors raised by the grid, operator, solver and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} samples, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("field has nonzero x-mean (relative xi=0 mass {defect:.3e}); the x-antiderivative is undefined")]
    NonzeroXMean { defect: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no sign change of the residual in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("solver became unstable at t = {t}; retry with a smaller dt")]
    Unstable {
        t: f64,
        last_good: Box<crate::solver::SimState>,
    },

    #[error("time window violated: {0}")]
    Window(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("diagnostics: {0}")]
    Diagnostics(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
