use std::io;
use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

use crate::metric::MetricId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing data: no `{metric}` snapshot for {date}")]
    MissingData { date: NaiveDate, metric: MetricId },

    #[error("degenerate range: every metric value equals {0}")]
    DegenerateRange(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("source `{source_id}` unavailable after {} attempt(s): {}", .trace.len(), .trace.join("; "))]
    SourceUnavailable {
        source_id: String,
        trace: Vec<String>,
    },

    #[error("fixture missing: {}", .0.display())]
    FixtureMissing(PathBuf),

    #[error("parse error in `{source_id}` payload at byte {offset}: {message}")]
    Parse {
        source_id: String,
        offset: usize,
        message: String,
    },

    #[error("schema mismatch in `{source_id}` payload: {message}")]
    SchemaMismatch { source_id: String, message: String },

    #[error("`{metric}` snapshot for {date} already stored")]
    AlreadyStored { date: NaiveDate, metric: MetricId },

    #[error("store at {} is locked by another writer", .0.display())]
    StoreLocked(PathBuf),

    #[error("corrupt store record {}:{line}: {message}", .path.display())]
    CorruptRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invalid_distribution(msg: impl Into<String>) -> Self {
        Error::InvalidDistribution(msg.into())
    }
}
