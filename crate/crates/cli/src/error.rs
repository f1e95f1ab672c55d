use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or argument values; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Malformed automaton file; exit code 3.
    #[error("invalid automaton file: {0}")]
    Format(String),
    #[error("{0}")]
    Library(#[from] qfa::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
