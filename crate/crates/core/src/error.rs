use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("truncated input: need {needed} samples, have {available}")]
    Truncation { needed: usize, available: usize },
    #[error("low-confidence phase estimate: correlation {magnitude:.3e} below floor {floor:.3e}")]
    LowConfidence { magnitude: f64, floor: f64 },
    #[error("calibration failure: {0}")]
    Calibration(String),
    #[error("sync failure: peak metric {metric:.4} below threshold {threshold:.4}")]
    SyncFailure { metric: f64, threshold: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("subspace empty: order {order} leaves no noise subspace for {elements} elements")]
    SubspaceEmpty { order: usize, elements: usize },
    #[error("invalid root: {0}")]
    InvalidRoot(String),
    #[error("estimation error: {0}")]
    Estimation(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short stable label, used as the status column of reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Usage(_) => "usage",
            Error::Domain(_) => "domain",
            Error::Truncation { .. } => "truncation",
            Error::LowConfidence { .. } => "low-confidence",
            Error::Calibration(_) => "calibration-failure",
            Error::SyncFailure { .. } => "sync-failure",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Numeric(_) => "numeric",
            Error::SubspaceEmpty { .. } => "subspace-empty",
            Error::InvalidRoot(_) => "invalid-root",
            Error::Estimation(_) => "estimation",
            Error::Range(_) => "out-of-range",
            Error::Format { .. } => "format",
            Error::Io(_) => "io",
        }
    }
}
