use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {index} ({src}->{dst}) is out of range for {num_vertices} vertices")]
    EdgeOutOfRange {
        index: usize,
        src: usize,
        dst: usize,
        num_vertices: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("division by zero while combining features")]
    DivisionByZero,

    #[error("operator {0} requires edge features")]
    MissingEdgeFeatures(&'static str),

    #[error("block size must be at least 1")]
    InvalidBlockSize,

    #[error("invalid scheduling parameters: workers={workers}, chunk={chunk}")]
    InvalidSchedule { workers: usize, chunk: usize },

    #[error("invalid partitioning request: {0}")]
    InvalidPartition(String),

    #[error("edge set is empty")]
    EmptyEdgeSet,

    #[error("unknown split tree {tree} in message from rank {src_rank}")]
    UnknownTree { tree: usize, src_rank: usize },

    #[error("rank {rank} is out of range for a cluster of {k} ranks")]
    RankOutOfRange { rank: usize, k: usize },

    #[error("epoch {got} processed out of order on channel {layer}, expected {expected}")]
    OutOfOrderEpoch {
        layer: usize,
        expected: usize,
        got: usize,
    },

    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("no labeled vertex owns a loss term")]
    NoLabeledVertex,

    #[error("label {label} is out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("backward called before forward")]
    BackwardWithoutForward,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
