use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pair is not critical: sigma_b2 * sigma_w2 = {product}")]
    NotCritical { product: f64 },
    #[error("white weights have the heavier tail; swap the colours")]
    WhiteTailHeavier,
    #[error("wrong regime for this operation: {0}")]
    WrongRegime(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("no client is served at time {0}")]
    NoClient(f64),
    #[error("space too large for exact computation: {0} points")]
    TooLarge(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ModelError::InvalidParameter(msg.into()))
}
