use thiserror::Error;

/// Input errors; every variant maps to exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("SchemaError: {0}")]
    Schema(String),
    #[error("{module} error: {message}")]
    Module { module: &'static str, message: String },
    #[error("IoError: {0}")]
    Io(String),
}

impl CliError {
    pub fn module(module: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Module { module, message: e.to_string() }
    }

    /// Classifies a serde_json failure: malformed text is a parse error, a
    /// well-formed document with the wrong shape is a schema error.
    pub fn from_json(origin: &str, e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => CliError::Schema(format!("{origin}: {e}")),
            _ => CliError::Parse(format!("{origin}: {e}")),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
