//! Error type shared by every solver tier.

use thiserror::Error;

/// Failures raised by field operations and solvers.
///
/// Variants that concern a field extremum carry the offending value and the
/// flat collocation index where it occurs, so reports can point at it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("field shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value in {field} at index {index}")]
    NonFinite { field: String, index: usize },

    #[error("theta-mean {max_abs:e} exceeds tolerance at spatial index {index}")]
    MeanNotZero { max_abs: f64, index: usize },

    #[error("density {min:e} at index {index} is not above the floor")]
    NonPositiveDensity { min: f64, index: usize },

    #[error("phase gradient magnitude {min:e} at index {index} is below the floor")]
    VanishingPhaseGradient { min: f64, index: usize },

    #[error("label map gradient is singular (det {det:e}) at index {index}")]
    SingularLabelMap { det: f64, index: usize },

    #[error("Doppler-shifted phase speed {min:e} at index {index} is below the floor")]
    ResonantDenominator { min: f64, index: usize },

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
