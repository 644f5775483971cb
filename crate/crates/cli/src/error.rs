//! Stage errors with distinct process exit codes.

use std::fmt;

use llsp_core::Error as CoreError;

/// Exit-code categories: 2 config, 3 data, 4 numeric, 5 internal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
            ErrorKind::Internal => 5,
        }
    }
}

#[derive(Debug)]
pub struct StageError {
    pub kind: ErrorKind,
    pub message: String,
}

impl StageError {
    pub fn config(message: impl Into<String>) -> Self {
        StageError {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        StageError {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        StageError {
            kind: ErrorKind::Internal,
            message: message.into(),
        }
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for StageError {}

impl From<CoreError> for StageError {
    fn from(e: CoreError) -> Self {
        let kind = match &e {
            CoreError::InvalidSpec(_) => ErrorKind::Config,
            CoreError::Io(_)
            | CoreError::MissingSegmentFile { .. }
            | CoreError::SampleParse { .. }
            | CoreError::SampleCount { .. }
            | CoreError::Data(_)
            | CoreError::CsvSchema(_)
            | CoreError::EmptyInput(_) => ErrorKind::Data,
            CoreError::SingularGram
            | CoreError::RankDeficient { .. }
            | CoreError::NonFinite(_)
            | CoreError::OutOfDomain { .. }
            | CoreError::SingleClassTraining
            | CoreError::ResourceLimit { .. }
            | CoreError::Extraction { .. } => ErrorKind::Numeric,
            CoreError::DimensionMismatch { .. } | CoreError::Persistence(_) => ErrorKind::Internal,
        };
        StageError {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for StageError {
    fn from(e: std::io::Error) -> Self {
        StageError {
            kind: ErrorKind::Data,
            message: e.to_string(),
        }
    }
}

pub type StageResult<T> = Result<T, StageError>;
