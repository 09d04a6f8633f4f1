use thiserror::Error;

/// Errors produced by topology construction, solvers and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("insufficient history: need {need} entries, got {got}")]
    InsufficientHistory { need: usize, got: usize },

    #[error("infeasible action: {0}")]
    InfeasibleAction(String),

    #[error("content {0} is cached more than once; single-copy formula does not apply")]
    MultiCopyState(u32),

    #[error("previous state is not single-copy (content {0} has multiple copies)")]
    MultiCopyPrevState(u32),

    #[error("content sizes must all be 1 for this solver")]
    NonUnitSize,

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("infeasible flow: requested {requested}, maximum achievable {max}")]
    InfeasibleFlow { requested: i64, max: i64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 when a solver cap is exceeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Validation(_) | Error::InvalidParameter(_) => 2,
            Error::InstanceTooLarge(_) => 3,
            _ => 1,
        }
    }
}
