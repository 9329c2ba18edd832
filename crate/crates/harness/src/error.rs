use thiserror::Error;

/// Harness failures split by exit code: configuration problems reject the
/// run before it starts (exit 2), run failures abort it midway (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Run(String),
}

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::Run(_) => 3,
        }
    }
}

impl From<perfmap::Error> for Error {
    fn from(e: perfmap::Error) -> Self {
        Error::Run(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
