use serde_json::{json, Value};
use thiserror::Error;

/// A failure with its exit code: 2 for unreadable or malformed input, 3 for
/// a mathematical precondition, 4 for an internal inconsistency.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Math(hgm_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Math(e) if e.is_internal() => 4,
            CliError::Math(_) => 3,
        }
    }

    /// The machine-readable error object.
    pub fn to_json(&self) -> Value {
        let (kind, location) = match self {
            CliError::Parse { location, .. } => ("parse", Some(location.clone())),
            CliError::Io { path, .. } => ("io", Some(path.clone())),
            CliError::Math(e) if e.is_internal() => ("internal", None),
            CliError::Math(_) => ("math", None),
        };
        let message = match self {
            CliError::Parse { message, .. } => message.clone(),
            other => other.to_string(),
        };
        json!({
            "error": {
                "kind": kind,
                "exit_code": self.exit_code(),
                "location": location,
                "message": message,
            }
        })
    }
}

impl From<hgm_core::Error> for CliError {
    fn from(e: hgm_core::Error) -> Self {
        CliError::Math(e)
    }
}
