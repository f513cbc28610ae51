use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("invalid config: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("invalid expression at {location}: {source}")]
    Expression {
        location: String,
        source: subgeo_core::Error,
    },

    #[error("geodesic job `{job}`: {source}")]
    Integration { job: String, source: subgeo_core::Error },
}

impl CliError {
    pub fn schema(location: &str, message: impl Into<String>) -> CliError {
        CliError::Schema {
            location: location.to_string(),
            message: message.into(),
        }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Integration { .. } => crate::EXIT_FAIL,
            _ => crate::EXIT_CONFIG,
        }
    }
}
