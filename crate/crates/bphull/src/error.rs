use std::path::PathBuf;

/// Errors surfaced by the harness, file output and command line.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] bphull_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown suite `{0}`; run `bphull verify --list` for the available suites")]
    UnknownSuite(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for bad input, 3 for I/O, 1 for anything that
    /// went wrong while running.
    pub fn exit_code(&self) -> u8 {
        use bphull_core::Error as E;
        match self {
            Self::Core(E::Domain(_) | E::Config(_)) | Self::Config(_) | Self::UnknownSuite(_) => 2,
            Self::Io { .. } | Self::Json(_) => 3,
            Self::Core(_) => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(
            AppError::Core(bphull_core::Error::Domain("x".into())).exit_code(),
            2
        );
        assert_eq!(AppError::UnknownSuite("x".into()).exit_code(), 2);
        assert_eq!(AppError::io("a", std::io::Error::other("x")).exit_code(), 3);
        assert_eq!(
            AppError::Core(bphull_core::Error::Resource("x".into())).exit_code(),
            1
        );
    }
}
