use grpda_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    /// `1` for solver or I/O failures, `2` for anything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Invalid(_) | BenchError::Json(_) => EXIT_INVALID,
            BenchError::Failed(_) | BenchError::Io(_) => EXIT_SOLVER,
            BenchError::Core(e) => match e {
                CoreError::Diverged { .. } | CoreError::NoConvergence(_) | CoreError::Io(_) => EXIT_SOLVER,
                _ => EXIT_INVALID,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
