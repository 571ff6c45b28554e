use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A rejected input line: 1-based line number in the source and the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct BadRow {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: missing required column `{0}`")]
    MissingColumn(String),

    #[error("schema error: line {line} is missing field `{field}`")]
    MissingField { line: usize, field: String },

    #[error("schema error: line {line}: bad `{field}` value `{value}`")]
    BadField { line: usize, field: String, value: String },

    #[error("schema error: duplicate column `{0}`")]
    DuplicateColumn(String),

    #[error("ingestion error: {0}")]
    Ingest(String),

    #[error("ingestion error: {} row(s) rejected (first at line {})", .0.len(), .0.first().map_or(0, |r| r.line))]
    BadRows(Vec<BadRow>),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("invalid model spec `{name}`: {reason}")]
    InvalidSpec { name: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("need at least {needed} rows, got {got}")]
    InsufficientRows { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("empty candidate pool")]
    EmptyPool,

    #[error("infeasible budget: {0}")]
    Budget(String),

    #[error("candidate pool exhausted at iteration {iteration}: {remaining} left, batch needs {needed}")]
    PoolExhausted { iteration: usize, remaining: usize, needed: usize },

    #[error("fitting model `{spec}` failed: {source}")]
    Fit {
        spec: String,
        #[source]
        source: Box<Error>,
    },

    #[error("run {run} failed: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
