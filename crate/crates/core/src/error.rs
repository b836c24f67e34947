use thiserror::Error;

use crate::imaging::{BoundingBox, ColorSpace};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("expected {expected:?} image, got {actual:?}")]
    ColorSpace {
        expected: ColorSpace,
        actual: ColorSpace,
    },

    #[error("box {bbox} outside {width}x{height} image")]
    OutOfBounds {
        bbox: BoundingBox,
        width: u32,
        height: u32,
    },

    #[error("region {0} is too small to split into quadrants")]
    DegenerateRegion(BoundingBox),

    #[error("fewer than three non-collinear points, no proper hull")]
    DegenerateHull,

    #[error("crop has zero total intensity")]
    ZeroMass,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{needed} clusters need names but only {given} were supplied")]
    InsufficientNames { needed: usize, given: usize },

    #[error("session contains no detections")]
    EmptySession,

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("{} box(es) out of frame bounds: {}", .0.len(), .0.join("; "))]
    BoxesOutOfFrame(Vec<String>),

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            message: message.into(),
        }
    }
}
