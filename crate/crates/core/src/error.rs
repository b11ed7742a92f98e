use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: timestamp {t} ms decreases from {prev} ms")]
    Order { line: usize, t: i64, prev: i64 },

    #[error("empty sensor stream: {0}")]
    EmptyStream(String),

    #[error("degenerate stroke: {0}")]
    DegenerateStroke(String),

    #[error("too few samples for {what}: got {got}, need {need}")]
    TooFewSamples {
        what: String,
        got: usize,
        need: usize,
    },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("no training data")]
    EmptyData,

    #[error("missing feature `{0}`")]
    MissingFeature(String),

    #[error("feature mask selects nothing")]
    EmptyMask,

    #[error("dimension mismatch: model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },

    #[error("corrupt model: {0}")]
    CorruptModel(String),

    #[error("no {0} scores")]
    EmptySide(&'static str),

    #[error("invalid behavior profile: {0}")]
    InvalidProfile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid session: {0}")]
    InvalidSession(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Configuration problems are the caller's fault; everything else is
    /// attributed to the data being processed.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::InvalidProfile(_) | Error::EmptyMask
        )
    }
}
