use thiserror::Error;

/// Errors raised while building or loading domain objects.
#[derive(Debug, Error)]
pub enum MapfError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for graph with {node_count} nodes")]
    VertexOutOfRange { vertex: usize, node_count: usize },
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("configuration places two agents on vertex {0}")]
    NotInjective(usize),
    #[error("configuration has {found} agents, expected {expected}")]
    AgentCountMismatch { expected: usize, found: usize },
    #[error("invalid fleet action at step {step}: {reason}")]
    InvalidStep { step: usize, reason: String },
    #[error("prefix length {k} exceeds plan length {len}")]
    PrefixOutOfRange { k: usize, len: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("plan does not end in the target configuration")]
    TargetMismatch,
    #[error("plans do not share the same start configuration")]
    StartMismatch,
    #[error("search budget exhausted after {0} states")]
    BudgetExhausted(usize),
    #[error("initial planner failed after {0} attempts")]
    InitializerFailed(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, MapfError>;
