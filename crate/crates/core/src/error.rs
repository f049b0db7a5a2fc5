use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("collinear overlap between segments")]
    OverlapDetected,
    #[error("obstacles overlap: disk {a} and disk {b} (copy offset {offset:?})")]
    OverlappingObstacles { a: usize, b: usize, offset: (i64, i64) },
    #[error("free flight exceeds the horizon bound (longest flight found: {max_flight})")]
    HorizonViolation { max_flight: f64 },
    #[error("tangential hit (discriminant {disc:e})")]
    TangentialHit { disc: f64 },
    #[error("cell gap {gap} exceeds cell span {span}")]
    SpanTooSmall { gap: i64, span: i64 },
    #[error("expected a {expected}-dimensional path, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("arc meets one of its own vertical translates")]
    BprimeViolation,
    #[error("invalid disk {index}: {reason}")]
    InvalidDisk { index: usize, reason: String },
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
