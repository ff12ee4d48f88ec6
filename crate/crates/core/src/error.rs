use thiserror::Error;

/// Rejected configuration, with the path of the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Prefix the field path, e.g. `sensor_angle_deg` becomes `params.sensor_angle_deg`.
    pub fn within(mut self, parent: &str) -> Self {
        self.field = format!("{parent}.{}", self.field);
        self
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed frame: {0}")]
    Frame(String),
    #[error("undefined: {0}")]
    Undefined(&'static str),
}

impl Error {
    /// True for errors caused by the user's input rather than the runtime.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Parse(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
