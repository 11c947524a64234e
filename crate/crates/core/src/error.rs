use thiserror::Error;

use crate::calendar::YearMonth;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series is empty")]
    EmptySeries,
    #[error("negative timestamp {0}")]
    NegativeTimestamp(i64),
    #[error("interval must be positive")]
    ZeroInterval,
    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),
    #[error("timestamps are not increasing: {previous} is followed by {next}")]
    NonMonotonic { previous: i64, next: i64 },
    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(i64),
    #[error("gap of {gap}s after timestamp {after} is not a multiple of the {interval}s interval")]
    InconsistentInterval { after: i64, gap: i64, interval: u32 },
    #[error("series is constant ({0}); normalization needs two distinct values")]
    ConstantSeries(f64),
    #[error("invalid normalization range [{min}, {max}]")]
    InvalidNormalization { min: f64, max: f64 },
    #[error("invalid month `{0}` (expected YYYY-MM)")]
    InvalidMonth(alloc::string::String),
    #[error("no points fall in month {0}")]
    EmptyMonth(YearMonth),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-finite gradient at parameter {0}")]
    NonFiniteGradient(usize),
    #[error("non-finite loss at step {0}")]
    NonFiniteLoss(usize),
    #[error("feature width {got} does not match model input width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("invalid model shape: {0}")]
    InvalidShape(&'static str),
    #[error("label span ({start}, {end}) is outside {len} points")]
    LabelOutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("label spans must be sorted and non-overlapping; ({start}, {end}) is not")]
    InvalidLabels { start: usize, end: usize },
    #[error("correlation needs at least 2 streams of at least 3 points")]
    NotEnoughStreams,
    #[error("stream {0} is constant; correlation is undefined")]
    ConstantStream(usize),
    #[error("span ({start}, {end}) is outside {len} points")]
    SpanOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("day {day} is outside the series ({days} whole days)")]
    DayOutOfRange { day: usize, days: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}
