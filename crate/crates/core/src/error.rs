//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: expected length {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("value {value} outside domain [{min}, {max}]")]
    OutOfDomain { value: f64, min: f64, max: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// The Gram matrix of the normal equations is numerically singular.
    /// The full-rank assumption does not hold; solve via the SVD path.
    #[error(
        "Gram matrix is numerically singular; the system is rank-deficient, \
         use solve_svd_min_norm instead"
    )]
    SingularGram,

    /// Orthogonal triangularization detected rank deficiency.
    #[error(
        "rank deficiency detected (numerical rank {rank} of {cols} columns); \
         use solve_svd_min_norm instead"
    )]
    RankDeficient { rank: usize, cols: usize },

    #[error("training data contains a single class; both classes are required")]
    SingleClassTraining,

    #[error("estimated memory {needed_bytes} B exceeds configured cap {cap_bytes} B")]
    ResourceLimit { needed_bytes: u64, cap_bytes: u64 },

    #[error("segment file missing: set {set}, index {index} (expected {expected})")]
    MissingSegmentFile {
        set: char,
        index: usize,
        expected: String,
    },

    #[error("{file}:{line}: cannot parse sample value {content:?}")]
    SampleParse {
        file: String,
        line: usize,
        content: String,
    },

    #[error("{file}: expected {expected} samples, got {got}")]
    SampleCount {
        file: String,
        expected: usize,
        got: usize,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("CSV schema mismatch: {0}")]
    CsvSchema(String),

    #[error("model persistence: {0}")]
    Persistence(String),

    #[error("segment {segment_id} (omega {omega} Hz, tau {tau} rad): {source}")]
    Extraction {
        segment_id: String,
        omega: f64,
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach segment and grid-point context to a solver error.
    pub fn at_grid_point(self, segment_id: &str, omega: f64, tau: f64) -> Self {
        Error::Extraction {
            segment_id: segment_id.to_owned(),
            omega,
            tau,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
