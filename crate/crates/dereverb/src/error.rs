use thiserror::Error;

/// Coordinate axis, used to report which bound a point violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
            Axis::Z => write!(f, "z"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid room model: {0}")]
    InvalidRoom(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("point {index} lies outside the room on the {axis} axis")]
    PointOutsideRoom { index: usize, axis: Axis },

    #[error("source and receiver coincide")]
    CoincidentSourceReceiver,

    #[error("mirror oracle order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: u32, max: u32 },

    #[error("window time constant must be positive, got {0}")]
    NonpositiveTau(f64),

    #[error("regularization beta must be non-negative, got {0}")]
    BetaNegative(f64),

    #[error("transfer matrix is singular at frequency bin {0} with beta = 0")]
    SingularBin(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sample rate mismatch: {0} vs {1}")]
    RateMismatch(f64, f64),

    #[error("interval starting at sample {0} has zero RMS")]
    ZeroRmsInterval(usize),

    #[error("integration region is empty: {0}")]
    EmptyIntegrationRegion(String),

    #[error("signal has zero energy")]
    ZeroEnergy,

    #[error("level must be positive, got {0} dB")]
    NonpositiveLevel(f64),

    #[error("absorptivity must lie in [0, 1], got {0}")]
    OutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
