use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("track has fewer than 2 points")]
    EmptyTrack,
    #[error("only {survivors} points survived cleaning, need {required}")]
    TooSparse { survivors: usize, required: usize },
    #[error("slice [{t_a}, {t_b}] does not overlap the track")]
    EmptySlice { t_a: f64, t_b: f64 },
    #[error("series span {span} s exceeds normalization constant T_M = {t_max} s")]
    SpanExceedsTM { span: f64, t_max: f64 },
    #[error("unknown aircraft type {0:?}")]
    UnknownAircraftType(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("target {q} kg outside scaler range [{q_min}, {q_max}]")]
    TargetOutOfRange { q: f64, q_min: f64, q_max: f64 },
    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
    #[error("model version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("interval shorter than minimum: {len} s < {min} s")]
    IntervalTooShort { len: f64, min: f64 },
    #[error("curve construction is not monotone on interval {interval}")]
    NonMonotonicConstruction { interval: usize },
    #[error("time {t} outside curve domain [{t_min}, {t_max}]")]
    OutOfDomain { t: f64, t_min: f64, t_max: f64 },
    #[error("model output is non-monotone: {repaired} of {total} points needed repair")]
    NonMonotoneModelOutput { repaired: usize, total: usize },
    #[error("truth value at index {0} is zero")]
    ZeroTruth(usize),
    #[error("reference curve has zero norm")]
    ZeroReference,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("flow curve [{curve_start}, {curve_end}] does not span track [{track_start}, {track_end}]")]
    SpanMismatch {
        curve_start: f64,
        curve_end: f64,
        track_start: f64,
        track_end: f64,
    },
    #[error("grid specs differ")]
    SpecMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, used by the CLI on standard error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedRecord { .. } => "malformed_record",
            Error::EmptyTrack => "empty_track",
            Error::TooSparse { .. } => "too_sparse",
            Error::EmptySlice { .. } => "empty_slice",
            Error::SpanExceedsTM { .. } => "span_exceeds_tm",
            Error::UnknownAircraftType(_) => "unknown_aircraft_type",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::TargetOutOfRange { .. } => "target_out_of_range",
            Error::Diverged { .. } => "diverged",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::CorruptModel(_) => "corrupt_model",
            Error::IntervalTooShort { .. } => "interval_too_short",
            Error::NonMonotonicConstruction { .. } => "non_monotonic_construction",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::NonMonotoneModelOutput { .. } => "non_monotone_model_output",
            Error::ZeroTruth(_) => "zero_truth",
            Error::ZeroReference => "zero_reference",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::SpanMismatch { .. } => "span_mismatch",
            Error::SpecMismatch => "spec_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Whether the failure is attributable to caller input rather than an internal fault.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::Diverged { .. } | Error::NonMonotonicConstruction { .. }
        )
    }
}
