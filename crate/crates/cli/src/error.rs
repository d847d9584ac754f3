use resonance_core::Error as NumericalError;
use serde_json::json;
use thiserror::Error;

use crate::config::Violation;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid arguments: {0}")]
    Usage(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config has {} invalid field(s)", .0.len())]
    Validation(Vec<Violation>),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Numerical(#[from] NumericalError),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Parse { .. } => "ParseError",
            CliError::Validation(_) => "ValidationError",
            CliError::Io { .. } => "IoError",
            CliError::Numerical(e) => e.name(),
        }
    }

    /// 1 for anything wrong with the input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }

    /// Single-line JSON record for standard error.
    pub fn record(&self) -> String {
        let mut value = json!({
            "error": self.name(),
            "exit": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            CliError::Parse { line, column, .. } => {
                value["line"] = json!(line);
                value["column"] = json!(column);
            }
            CliError::Validation(violations) => {
                value["violations"] = json!(violations);
            }
            _ => {}
        }
        value.to_string()
    }

    pub fn io(path: &str, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            message: err.to_string(),
        }
    }
}
