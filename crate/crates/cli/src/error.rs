use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config: {field} {constraint}")]
    Validation { field: String, constraint: String },

    #[error(transparent)]
    Model(#[from] lgcorr::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            constraint: constraint.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } => "config",
            CliError::Model(lgcorr::Error::Convergence { .. }) => "convergence",
            CliError::Model(_) => "model",
            CliError::Io { .. } => "io",
        }
    }

    /// 2 config, 3 convergence, 4 I/O. Domain errors from the model are
    /// caused by configured values and count as config errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } => 2,
            CliError::Model(lgcorr::Error::Convergence { .. }) => 3,
            CliError::Model(_) => 2,
            CliError::Io { .. } => 4,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
    }
}
