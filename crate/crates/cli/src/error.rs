// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::{Path, PathBuf};

/// CLI failure, split by exit code: 1 for bad input, 2 for I/O.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Output(#[source] std::io::Error),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } | CliError::Output(_) => 2,
        }
    }

    /// Machine-parsable tag printed before the message.
    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Io { .. } | CliError::Output(_) => "io",
        }
    }
}

impl From<softed_core::Error> for CliError {
    fn from(e: softed_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
