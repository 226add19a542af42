use thiserror::Error;

use crate::graph::Violation;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph '{id}': {}", format_violations(.violations))]
    InvalidGraph {
        id: String,
        violations: Vec<Violation>,
    },

    #[error("attribute dimension mismatch: graph '{left}' has (d={left_node}, c={left_edge}), graph '{right}' has (d={right_node}, c={right_edge})")]
    DimensionMismatch {
        left: String,
        right: String,
        left_node: usize,
        left_edge: usize,
        right_node: usize,
        right_edge: usize,
    },

    #[error("search budget of {budget} expanded states exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("unknown class label {label}, expected 1..={num_classes}")]
    UnknownClass { label: usize, num_classes: usize },

    #[error("class {class} has an empty memory queue")]
    EmptyClassMemory { class: usize },

    #[error("prototype count {requested} exceeds queue size {available}")]
    TooFewGraphs { requested: usize, available: usize },

    #[error("input vector has length {got}, classifier expects {expected}")]
    InputDimension { expected: usize, got: usize },

    #[error("training loss is not finite at step {step} (loss = {loss})")]
    NonFiniteLoss { step: u64, loss: f64 },

    #[error("non-binary drift score {0}")]
    NonBinaryScore(f64),

    #[error("window is empty")]
    EmptyWindow,

    #[error("recall {0} outside [0, 1]")]
    RecallOutOfRange(f64),

    #[error("graph '{id}' has {nodes} nodes, operation requires at least 2")]
    TooFewNodes { id: String, nodes: usize },

    #[error("operation requires an undirected graph, '{id}' is directed")]
    DirectedGraph { id: String },

    #[error("pipeline has already been warm-started")]
    AlreadyWarmStarted,

    #[error("pipeline must be warm-started before streaming")]
    NotWarmStarted,

    #[error("warm start needs exactly {expected} graphs for class {class}, got {got}")]
    WarmStartCount {
        class: usize,
        expected: usize,
        got: usize,
    },

    #[error("step {t} failed: {source}")]
    StepFailed { t: u64, source: Box<Error> },

    #[error("empty stream")]
    EmptyStream,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    StreamFormat {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("GXL parse error{}: {msg}", location_suffix(.location))]
    Gxl {
        msg: String,
        location: Option<String>,
    },

    #[error("CXL parse error{}: {msg}", location_suffix(.location))]
    Cxl {
        msg: String,
        location: Option<String>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn location_suffix(location: &Option<String>) -> String {
    match location {
        Some(loc) => format!(" at {loc}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
