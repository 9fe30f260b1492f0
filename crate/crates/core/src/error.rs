use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("node id {id} out of range for n={n}")]
    NodeOutOfRange { id: usize, n: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("geometric spec invalid: {0}")]
    BadGeometry(String),
    #[error("exact alpha requested for n={0} > 40")]
    ExactAlphaTooLarge(usize),
    #[error("empty graph")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("expected {expected} actions, got {got}")]
    ActionCountMismatch { expected: usize, got: usize },
    #[error("expected {expected} programs, got {got}")]
    ProgramCountMismatch { expected: usize, got: usize },
    #[error("reception invariant violated at round {round}, node {node}: {msg}")]
    ReceptionViolation {
        round: u64,
        node: usize,
        msg: String,
    },
    #[error("empty center set for non-empty graph")]
    NoCenters,
    #[error("trace decode error: {0}")]
    TraceDecode(String),
}
