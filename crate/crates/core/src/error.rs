use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("window length must be positive")]
    ZeroWindow,
    #[error("series too short: need at least {need} windows, got {got}")]
    SeriesTooShort { need: usize, got: usize },
    #[error("insufficient data for lag sweep: need at least {need} windows, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("ground truth is not an IMU trace")]
    NotImu,
    #[error("ground truth is not an audio-event trace")]
    NotAudio,
    #[error("invalid MAC address {0:?}")]
    BadMac(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid polygon: {0}")]
    Polygon(String),
    #[error("malformed S5 script: {0}")]
    MalformedS5(String),
    #[error("insufficient activity in ground truth: {0}")]
    InsufficientActivity(String),
    #[error("ground truth and traffic time spans do not match: {0}")]
    SpanMismatch(String),
    #[error("unknown countermeasure {0:?}")]
    UnknownCountermeasure(String),
    #[error("sensor is not localizable: {0}")]
    NotLocalizable(String),
    #[error("device {0} not present")]
    UnknownDevice(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
