use hbat_core::HbatError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] HbatError),

    #[error("config: {0}")]
    Config(String),

    #[error("honeyChecker protocol: {0}")]
    Protocol(String),

    #[error("honeyChecker did not answer within {0} ms")]
    Timeout(u64),
}

pub type Result<T> = std::result::Result<T, ServiceError>;
