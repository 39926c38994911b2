//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid instance: field `{field}`: {reason}")]
    InvalidInstance { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty point set")]
    EmptyPointSet,

    #[error("length mismatch: {what}")]
    LengthMismatch { what: String },

    #[error("index out of range: {what}")]
    IndexOutOfRange { what: String },

    #[error("instance too large for exact enumeration (nx = {nx}, guard = {guard})")]
    InstanceTooLarge { nx: usize, guard: usize },

    #[error("channel row for vertex {vertex} is not normalized (sum = {sum})")]
    ChannelNotNormalized { vertex: usize, sum: f64 },

    #[error("vertex {vertex} lies in {} maximal edges: {edges:?}", edges.len())]
    AmbiguousClustering { vertex: usize, edges: Vec<usize> },

    #[error("grid oracle needs <= {limit} free channel parameters, instance has {count}")]
    TooManyFreeParameters { count: usize, limit: usize },

    #[error("refinement precondition violated: p(u={u}, x={x}, y={y}) > 0 but reconstruction misses by more than epsilon")]
    RefinePrecondition { u: usize, x: usize, y: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("stream symbol {symbol} has zero probability and no cluster assignment")]
    UnassignedSymbol { symbol: usize },

    #[error("sources are not independent (p({x},{y}) differs from p(x)p(y) by {delta})")]
    DependentSources { x: usize, y: usize, delta: f64 },

    #[error("codec needs a binary quantizer: hypergraph has {edges} maximal edges")]
    NonBinaryQuantizer { edges: usize },

    #[error("target rate {target} is not above I(W;X) = {mutual_information}")]
    InfeasibleRate { target: f64, mutual_information: f64 },

    #[error("unknown fixture `{0}` (expected example1 | example2 | fig4 | fig5)")]
    UnknownFixture(String),

    #[error("corrupt encoded block: {0}")]
    CorruptBlock(String),
}

impl Error {
    /// Process exit code class: 2 for instance/invariant errors, 3 for codec
    /// precondition failures (usage errors are handled by the CLI itself).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AmbiguousClustering { .. }
            | Error::DependentSources { .. }
            | Error::NonBinaryQuantizer { .. }
            | Error::InfeasibleRate { .. }
            | Error::PreconditionViolated(_)
            | Error::RefinePrecondition { .. }
            | Error::UnassignedSymbol { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
