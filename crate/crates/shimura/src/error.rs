use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("out of supported range: {0}")]
    OutOfRange(String),
    #[error("invalid discriminant {0}")]
    InvalidDiscriminant(i64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("singular model")]
    SingularModel,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("bad reduction at p = {0}")]
    BadPrime(u64),
    #[error("invalid Atkin-Lehner data: {0}")]
    AtkinLehner(String),
    #[error("map data inconsistent: {0}")]
    MapInconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("record {id}: {msg}")]
    Record { id: String, msg: String },
    #[error("unknown curve {0}")]
    UnknownCurve(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
