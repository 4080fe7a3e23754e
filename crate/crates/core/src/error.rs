use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at data row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("encoding error in column `{column}`: unseen category value `{value}`")]
    UnseenCategory { column: String, value: String },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("null values remain in used columns at rows {rows:?}")]
    NullsPresent { rows: Vec<usize> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(
        "normal equations are singular or ill-conditioned (reciprocal condition {rcond:.3e}); \
         consider ridge regression with a positive lambda"
    )]
    IllConditioned { rcond: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("undefined statistic: {0}")]
    Undefined(&'static str),

    #[error("fit failed at lambda = {lambda:e}: {source}")]
    PathFit {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Schema(_) | Error::InvalidArgument(_) | Error::Io { .. } => ErrorKind::Config,
            Error::Parse { .. }
            | Error::UnseenCategory { .. }
            | Error::Encoding(_)
            | Error::NullsPresent { .. }
            | Error::DimensionMismatch { .. }
            | Error::Empty(_)
            | Error::Csv(_)
            | Error::Json(_) => ErrorKind::Data,
            Error::IllConditioned { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::Undefined(_) => ErrorKind::Numeric,
            Error::PathFit { source, .. } | Error::Stage { source, .. } => source.kind(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            already @ Error::Stage { .. } => already,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }
}
