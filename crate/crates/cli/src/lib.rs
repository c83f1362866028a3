//! Command-line tool and HTTP service for matrisk.

pub mod commands;
pub mod config;
pub mod engine;
pub mod error;
pub mod http;
pub mod patient;

pub use config::AppConfig;
pub use engine::Engine;
pub use error::{CliError, FieldError, InputError, InputErrorKind};
