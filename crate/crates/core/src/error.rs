use thiserror::Error;

/// Errors produced by mesh construction, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error(
        "Newton iteration did not converge at time level {level} after {iters} iterations \
         (residual history: {history:?}); time step may be too large or the regularization \
         parameter pathologically small"
    )]
    NewtonNonConvergence {
        level: usize,
        iters: usize,
        history: Vec<f64>,
    },

    #[error("linear solve breakdown: {0}")]
    LinearSolveBreakdown(String),

    #[error("coordinate descent exhausted {sweeps} sweeps (last iterate change {change:e})")]
    SweepBudgetExhausted { sweeps: usize, change: f64 },

    #[error("nonfinite value detected: {0}")]
    NonFinite(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("optimizer failed: {reason} (cost history length {history_len})")]
    OptimizerFailure { reason: String, history_len: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
