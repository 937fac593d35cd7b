use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Maps a library error raised while handling `path`.
    pub fn lib(path: impl AsRef<std::path::Path>, err: cosenet::Error) -> Self {
        match err {
            cosenet::Error::Io(source) => Self::io(path, source),
            other => CliError::Validation(format!("{}: {other}", path.as_ref().display())),
        }
    }
}

impl From<cosenet::Error> for CliError {
    fn from(err: cosenet::Error) -> Self {
        match err {
            cosenet::Error::Io(source) => CliError::Io {
                path: "<unknown>".into(),
                source,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
