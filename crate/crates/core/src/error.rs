use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("copy index {index} out of range 1..={max}")]
    CopyIndex { index: usize, max: usize },

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("{0} is a boundary vertex")]
    BoundaryVertex(String),

    #[error("{0} is not a boundary vertex")]
    NotBoundary(String),

    #[error("functions live on different graphs")]
    GraphMismatch,

    #[error("coefficient tables cover degree {have}, need {need}")]
    TablesTooShort { have: usize, need: usize },

    #[error("singular linear system at index {0}")]
    Singular(usize),

    #[error("convention resolution failed: {reason}\n{table}")]
    Convention { reason: String, table: String },

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convention { .. } => 3,
            Error::Consistency(_) | Error::Singular(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
