use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{0}")]
    Overflow(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Overflow(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<iontrap::Error> for CliError {
    fn from(e: iontrap::Error) -> Self {
        match e {
            iontrap::Error::TruncationOverflow(_) => CliError::Overflow(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
