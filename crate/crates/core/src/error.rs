use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("{0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Input { field: String, message: String },
    #[error("region window for cone {cone} did not stabilize after {iterations} enlargements")]
    Window { cone: String, iterations: usize },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("unbounded set where a bounded one is required")]
    Unbounded,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn input(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Input { field: field.into(), message: message.into() }
    }

    /// True for failures caused by window growth or size limits rather than
    /// by bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Window { .. } | Error::Resource(_))
    }
}
