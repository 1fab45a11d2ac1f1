//! Error type shared across the crate.

/// Errors produced by estimation, interval construction, oracles, and the
/// simulation harness.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Fewer than two observations in total.
    #[error("sample must contain at least 2 observations, got {0}")]
    TooFewObservations(usize),

    /// Fewer than two classes present.
    #[error("at least 2 classes required, got {0}")]
    TooFewClasses(usize),

    /// A class is too small for point estimation (every class needs at least
    /// two members so its within-class mean distance is defined).
    #[error("class {class} has {count} observation(s); point estimation requires at least 2 per class")]
    ClassTooSmall { class: usize, count: usize },

    /// A class is too small for leave-one-out work (deleting a member must
    /// leave at least two, so jackknife methods need three per class).
    #[error("class {class} has {count} observation(s); jackknife methods require at least 3 per class")]
    ClassTooSmallForJackknife { class: usize, count: usize },

    /// A coordinate was NaN or infinite.
    #[error("non-finite coordinate at row {row}, column {col}")]
    NonFiniteCoordinate { row: usize, col: usize },

    /// Rows of the data matrix disagree in width, or the flat buffer length
    /// is not a multiple of the declared dimension.
    #[error("dimension mismatch: expected {expected} coordinates, got {got} (row {row})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        row: usize,
    },

    /// Number of labels differs from the number of rows.
    #[error("label count {labels} does not match observation count {rows}")]
    LabelLengthMismatch { rows: usize, labels: usize },

    /// All pairwise distances are zero, so the correlation is undefined.
    #[error("degenerate sample: all observations are identical")]
    DegenerateSample,

    /// Deleting one observation left an all-identical sample, so a jackknife
    /// replicate is undefined.
    #[error("degenerate deletion sample: removing row {row} leaves identical observations")]
    DegenerateDeletion { row: usize },

    /// Confidence level outside the supported open interval.
    #[error("confidence level must be in (0.5, 1), got {0}")]
    InvalidLevel(f64),

    /// Quantile argument outside (0, 1).
    #[error("quantile argument must be in (0, 1), got {0}")]
    InvalidQuantile(f64),

    /// A numeric parameter violated its domain.
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter {
        name: &'static str,
        message: String,
    },

    /// A scenario definition is inconsistent.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Repeated class-count draws kept producing a class below the minimum
    /// size.
    #[error("class {class} drew fewer than 3 observations in {attempts} attempts; increase n or its weight")]
    AllocationFailed { class: usize, attempts: usize },

    /// Too many replications of one batch failed to produce an interval.
    #[error("batch {batch}: {failures} of {replications} replications failed (more than 1%)")]
    ExcessiveFailures {
        batch: usize,
        failures: usize,
        replications: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
