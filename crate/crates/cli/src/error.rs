use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: scalemetrics_core::Error,
    },

    #[error("{0}")]
    Data(String),
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for bad or insufficient data.
    pub fn exit_code(&self) -> i32 {
        use scalemetrics_core::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Core { source, .. } => match source {
                E::Config(_) | E::Domain(_) => 1,
                _ => 2,
            },
            CliError::Io { .. } | CliError::Data(_) => 2,
        }
    }

    pub fn core(context: impl Into<String>, source: scalemetrics_core::Error) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
