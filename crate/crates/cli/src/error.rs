use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config key `{0}` given more than once")]
    DuplicateKey(String),

    #[error("line {line}: expected `key: value`, got `{text}`")]
    Malformed { line: usize, text: String },

    #[error("invalid value `{value}` for `{key}`: expected {expected}")]
    InvalidValue {
        key: String,
        value: String,
        expected: &'static str,
    },

    #[error("invalid {field}: {constraint}")]
    Constraint {
        field: &'static str,
        constraint: &'static str,
    },

    #[error("unknown subcommand `{0}`")]
    UnknownCommand(String),

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] telegraph_core::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl ToString) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
