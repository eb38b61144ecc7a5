use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Solver(#[from] chase_core::Error),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("suite config: {0}")]
    Config(#[from] toml::de::Error),
}

impl HarnessError {
    /// Process exit code: 2 for solver failures, 3 for parse errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Solver(e) if e.is_solver_failure() => 2,
            HarnessError::Parse { .. } | HarnessError::Config(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
