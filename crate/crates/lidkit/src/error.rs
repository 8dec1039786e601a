//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-monotonic timestamp at line {line}: {t} does not increase over {prev}")]
    NonMonotonicTimestamp { line: usize, t: f64, prev: f64 },

    #[error("inconsistent landmark count at line {line}: expected {expected}, found {found}")]
    InconsistentLandmarkCount {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("image dimensions must be positive (got {width}x{height})")]
    ZeroImageDimension { width: u32, height: u32 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("landmark index {index} out of range for {count} landmarks")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("no ELA sample: {0}")]
    NoSample(&'static str),

    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate blink: {0}")]
    DegenerateBlink(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("overlapping windows in {list}: [{a_start}, {a_end}] and [{b_start}, {b_end}]")]
    OverlappingWindows {
        list: &'static str,
        a_start: usize,
        a_end: usize,
        b_start: usize,
        b_end: usize,
    },

    #[error("unsupported model file version {found} (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("sampling failed: {0} (100 redraws exhausted)")]
    SamplingFailed(&'static str),

    #[error("head pose out of range: {axis} = {degrees}\u{b0} (|angle| must be < 89\u{b0})")]
    PoseOutOfRange { axis: &'static str, degrees: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("TOML error: {0}")]
    Toml(#[from] toml::de::Error),
}
