use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("non-generic parameters: {0}")]
    NonGeneric(String),

    #[error("unknown zone `{0}`")]
    UnknownZone(String),

    #[error("the weights of {0} do not determine the parameter zone; it must be given")]
    ZoneRequired(crate::coxeter::GroupType),

    #[error("polynomial is not bar-symmetric: {0}")]
    NotBarSymmetric(String),

    #[error("truncation unsafe: needs length {needed} but the ball has radius {radius}")]
    TruncationUnsafe { needed: usize, radius: usize },

    #[error("element {0} lies outside the enumerated ball")]
    OutsideBall(String),

    #[error("basis mismatch: expected {expected} basis")]
    BasisMismatch { expected: &'static str },

    #[error("the generating set of an infinite group has no longest element")]
    InfiniteParabolic,

    #[error("bar-invariance self-check failed for C_{0}")]
    BarInvariance(String),

    #[error("cache header mismatch: file has {found}, requested {requested}")]
    CacheHeaderMismatch { found: String, requested: String },

    #[error("{path}: corrupt record at line {line}: {reason}")]
    CorruptRecord { path: PathBuf, line: usize, reason: String },

    #[error("cell data error: {0}")]
    CellData(String),

    #[error("construction failure: {0}")]
    Construction(String),

    #[error("verification failure: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
