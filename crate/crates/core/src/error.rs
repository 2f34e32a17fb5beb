use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("capacity exceeded: {what} has size {size}, limit is {limit}")]
    Capacity {
        what: &'static str,
        size: u64,
        limit: u64,
    },

    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// numeric or capacity failures. Bound violations are reported through
    /// the run outcome, not as errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config(_) | Error::Json(_) => 2,
            Error::Numeric(_) | Error::Capacity { .. } => 3,
            Error::Io(_) | Error::Csv(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
