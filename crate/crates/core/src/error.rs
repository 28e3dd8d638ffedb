use thiserror::Error;

/// Errors raised anywhere in the decision pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("terminals must be four distinct nodes of the graph: {0}")]
    InvalidTerminals(String),

    #[error("edge endpoint `{0}` is not a node of the graph")]
    UnknownNode(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing `{0}` declaration")]
    MissingTerminals(&'static str),

    #[error("graph is not in standard form: {0}")]
    NotStandard(String),

    #[error("trace of A*R_{k} is {trace}, not divisible by {k}")]
    DivisibilityViolation { k: usize, trace: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("coefficient bound violated: {0}")]
    BoundViolation(String),

    #[error("enumeration cap of {cap} {what} exceeded")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("brute-force search exceeded its budget of {0} node expansions")]
    SearchBudgetExceeded(u64),

    #[error("no path from input {input} to output {output}")]
    NoPath { input: usize, output: usize },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
