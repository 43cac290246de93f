use thiserror::Error;

/// Errors produced anywhere in the embedding / extraction stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StegoError {
    #[error("quality factor {0} outside 1..=100")]
    InvalidQuality(i64),

    #[error("invalid quantization table: {0}")]
    InvalidQuantTable(String),

    #[error("invalid modification: {0}")]
    InvalidModification(String),

    #[error("unsupported JPEG: {0}")]
    UnsupportedJpeg(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("malformed JPEG: {0}")]
    MalformedJpeg(String),

    #[error("coefficient out of baseline range: {0}")]
    CoefficientOverflow(String),

    #[error("schedule does not match the requested channel: {0}")]
    ScheduleMismatch(String),

    #[error("unknown cost model '{0}'")]
    UnknownCostModel(String),

    #[error("invalid change rates: {0}")]
    InvalidRates(String),

    #[error("payload of {requested:.1} bits exceeds capacity of {capacity:.1} bits")]
    PayloadExceedsCapacity { requested: f64, capacity: f64 },

    #[error("change-rate solver did not converge after {0} iterations")]
    SolverNoConverge(usize),

    #[error("embedding infeasible: {0}")]
    EmbeddingInfeasible(String),

    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("channel mismatch: {0}")]
    ChannelMismatch(String),

    #[error("external coder failure: {0}")]
    ExternalCoderFailure(String),

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("invalid scan strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for StegoError {
    fn from(e: std::io::Error) -> Self {
        StegoError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, StegoError>;
