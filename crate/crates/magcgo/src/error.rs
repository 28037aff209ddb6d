use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("support error: {0}")]
    Support(String),
    #[error("solver error: {msg} (condition estimate {condition:.3e})")]
    Solver { msg: String, condition: f64 },
    #[error("pairing error: {0}")]
    Pairing(String),
    #[error("gauge error: {0}")]
    Gauge(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
