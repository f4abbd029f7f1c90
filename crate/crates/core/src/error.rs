use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variants map one-to-one onto the numeric codes exposed through the C ABI,
/// so new variants must be appended to [`Error::code`] as well.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("singular system at x={x}, t={t} (condition estimate {condition:.3e})")]
    SingularSystem { x: f64, t: f64, condition: f64 },
    #[error("evaluation point within {distance:.3e} of a pole")]
    PoleTooClose { distance: f64 },
    #[error("norming constant is zero")]
    ZeroConstant,
    #[error("grid too small: need at least {needed} points per direction, got {got}")]
    GridTooSmall { needed: usize, got: usize },
    #[error("grid is not uniform in {axis}")]
    NonUniformGrid { axis: &'static str },
    #[error("roots of (z - d0)^n = d1 are not distinct")]
    RootsNotDistinct,
    #[error("root {root} lies outside the upper half-plane")]
    RootsOutsideUpperHalfPlane { root: String },
    #[error("density does not match domain: {0}")]
    DensityMismatch(String),
    #[error("ordinate {y} lies outside the focal segment ({lo}, {hi})")]
    OutOfSegment { y: f64, lo: f64, hi: f64 },
    #[error("maximum iterations exceeded ({iterations}); gradient norm {gradient_norm:.3e}")]
    MaxIterationsExceeded { iterations: usize, gradient_norm: f64 },
    #[error("point {point} lies outside the reference unit disk")]
    PointOutsideReferenceDisk { point: String },
    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate sample (zero variance)")]
    Degenerate,
    #[error("non-positive input to power-law fit")]
    NonPositiveInput,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("peak not found: {0}")]
    PeakNotFound(String),
    #[error("too few oscillations: window {window:.3} shorter than {needed:.3}")]
    TooFewOscillations { window: f64, needed: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable numeric code used by the C ABI. Zero is reserved for success.
    pub fn code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 1,
            Error::InvariantViolation(_) => 2,
            Error::SingularSystem { .. } => 3,
            Error::PoleTooClose { .. } => 4,
            Error::ZeroConstant => 5,
            Error::GridTooSmall { .. } => 6,
            Error::NonUniformGrid { .. } => 7,
            Error::RootsNotDistinct => 8,
            Error::RootsOutsideUpperHalfPlane { .. } => 9,
            Error::DensityMismatch(_) => 10,
            Error::OutOfSegment { .. } => 11,
            Error::MaxIterationsExceeded { .. } => 12,
            Error::PointOutsideReferenceDisk { .. } => 13,
            Error::TooFewSamples { .. } => 14,
            Error::Degenerate => 15,
            Error::NonPositiveInput => 16,
            Error::LengthMismatch(..) => 17,
            Error::PeakNotFound(_) => 18,
            Error::TooFewOscillations { .. } => 19,
            Error::Config(_) => 20,
            Error::UnknownKey(_) => 21,
            Error::Io(_) => 22,
            Error::Json(_) => 23,
        }
    }

    /// True for failures caused by the numerics rather than by the caller.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. }
                | Error::PoleTooClose { .. }
                | Error::MaxIterationsExceeded { .. }
                | Error::PeakNotFound(_)
                | Error::TooFewOscillations { .. }
                | Error::InvariantViolation(_)
                | Error::RootsNotDistinct
                | Error::RootsOutsideUpperHalfPlane { .. }
        )
    }
}
