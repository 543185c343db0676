use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed artifact {path}: {msg}")]
    Artifact { path: PathBuf, msg: String },
}

impl CliError {
    /// Process exit code: 2 config, 3 solver, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
            Self::Io { .. } | Self::Artifact { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

impl From<miura_core::Error> for CliError {
    fn from(e: miura_core::Error) -> Self {
        use miura_core::Error as E;
        match e {
            E::OffsetTooLarge { .. } | E::InvalidPattern(_) | E::SingularChart { .. } => Self::Config(e.to_string()),
            _ => Self::Solver(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
