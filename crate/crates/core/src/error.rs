use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("half-space normal has norm {norm:e}; the request is degenerate")]
    ZeroNormal { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cone program infeasible: {0}")]
    Infeasible(String),

    #[error("solver stopped with gap {gap:e} above requested accuracy {eps:e} after {iterations} iterations")]
    AccuracyNotReached { gap: f64, eps: f64, iterations: usize },

    #[error("Steiner estimate needs {required} samples, cap is {cap}")]
    OracleBudgetExceeded { required: f64, cap: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures raised by the cone solver (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_) | Error::AccuracyNotReached { .. } | Error::OracleBudgetExceeded { .. }
        )
    }
}
