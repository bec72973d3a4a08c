use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("jet is not invertible: zero constant term")]
    NonUnit,

    #[error("matrix is singular at the basepoint")]
    DegenerateForm,

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("term with zero t-power cannot be divided by t")]
    MissingTFactor,

    #[error("invalid connection: {0}")]
    InvalidConnection(String),

    #[error("insufficient jet order: need at least {required}, have {actual}")]
    InsufficientJetOrder { required: u32, actual: u32 },

    #[error("truncation order too small: need at least {required}, have {actual}")]
    OrderTooSmall { required: u32, actual: u32 },

    #[error("cocycle condition failed at degree {degree}")]
    Cocycle { degree: u32 },

    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("validation failed:\n{}", failures.join("\n"))]
    Validation { failures: Vec<String> },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// One validation failure.
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation {
            failures: vec![msg.into()],
        }
    }

    /// Process exit code for the CLI: 0 success, 1 validation failure,
    /// 2 parse/usage error, 3 internal failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 2,
            Error::Cocycle { .. } | Error::Internal(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
