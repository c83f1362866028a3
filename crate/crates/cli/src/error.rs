use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// One problem with one input field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Whether the input was malformed or well-formed but clinically out of range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputErrorKind {
    Invalid,
    OutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputError {
    pub kind: InputErrorKind,
    pub fields: Vec<FieldError>,
}

impl InputError {
    pub fn invalid(fields: Vec<FieldError>) -> Self {
        Self {
            kind: InputErrorKind::Invalid,
            fields,
        }
    }

    pub fn single(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::invalid(vec![FieldError::new(field, message)])
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = match self.kind {
            InputErrorKind::Invalid => "invalid input",
            InputErrorKind::OutOfRange => "value out of range",
        };
        write!(f, "{head}:")?;
        for e in &self.fields {
            write!(f, " {}: {};", e.field, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for InputError {}

/// Errors surfaced by the command-line tool. Each maps to a distinct exit
/// code; see [`CliError::exit_code`].
#[derive(Debug, Error)]
pub enum CliError {
    #[error("model not found: {}", .0.display())]
    ModelNotFound(PathBuf),
    #[error("cannot use model file: {0}")]
    BadModel(String),
    #[error("{0}")]
    Input(#[from] InputError),
    #[error("data error: {0}")]
    Data(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub const EXIT_INTERNAL: i32 = 1;
    pub const EXIT_MODEL_NOT_FOUND: i32 = 3;
    pub const EXIT_BAD_MODEL: i32 = 4;
    pub const EXIT_INPUT: i32 = 5;
    pub const EXIT_DATA: i32 = 6;
    pub const EXIT_CONFIG: i32 = 7;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ModelNotFound(_) => Self::EXIT_MODEL_NOT_FOUND,
            CliError::BadModel(_) => Self::EXIT_BAD_MODEL,
            CliError::Input(_) => Self::EXIT_INPUT,
            CliError::Data(_) => Self::EXIT_DATA,
            CliError::Config(_) => Self::EXIT_CONFIG,
            CliError::Internal(_) => Self::EXIT_INTERNAL,
        }
    }
}
