use thiserror::Error;

/// Failures of a command-line invocation, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed flags, specs or files; exit code 1.
    #[error("{flag}: {message}")]
    Usage { flag: String, message: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A numerical routine failed; exit code 2.
    #[error("{kind}: {source}", kind = .source.kind())]
    Numeric {
        #[from]
        source: infogeo::Error,
    },
}

impl CliError {
    pub fn usage(flag: &str, message: impl Into<String>) -> Self {
        Self::Usage {
            flag: flag.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage { .. } | Self::Io { .. } => 1,
            Self::Numeric { .. } => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
