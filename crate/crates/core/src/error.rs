use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("line {line}: duration must be positive, got {value}")]
    NonPositiveDuration { line: usize, value: String },

    #[error("line {line}: pitch {value} outside MIDI range 0..=127")]
    PitchOutOfRange { line: usize, value: i64 },

    #[error("score has {found} notes, at least 2 are required")]
    TooFewNotes { found: usize },

    #[error("score has {found} distinct notes, at least 2 are required")]
    TooFewDistinctNotes { found: usize },

    #[error("network is disconnected: no path between node {from} and node {to}")]
    DisconnectedNetwork { from: usize, to: usize },

    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),

    #[error("scale must be at least 1, got {0}")]
    InvalidScale(usize),

    #[error("expected a {expected} overlap matrix, got {found}")]
    WrongMatrixKind { expected: &'static str, found: &'static str },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("every node is excluded, nothing left to sample")]
    EmptySamplingSupport,

    #[error("position {position}: surviving cycles have an empty common node set")]
    EmptyIntersection { position: usize },

    #[error("could not place seed matrix: {0}")]
    SeedPlacementFailed(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss at epoch {epoch}: {detail}")]
    NonFiniteLoss { epoch: usize, detail: String },

    #[error("unsupported format_version {found}, expected {expected}")]
    FormatVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
