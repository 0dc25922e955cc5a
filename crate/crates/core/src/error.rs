use thiserror::Error;

/// Errors raised across the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("unknown reference: {0}")]
    Reference(String),

    #[error("invalid query {query}: {reason}")]
    InvalidQuery { query: String, reason: String },

    #[error("join graph of query {0} is disconnected (cross products are not supported)")]
    Disconnected(String),

    #[error("incomplete cardinality assignment: no value for subplan {0}")]
    IncompleteAssignment(String),

    #[error("optimal plan has zero cost but the chosen plan costs {0}")]
    ZeroOptimalCost(f64),

    #[error("cardinality overflow while counting subplan {0}")]
    Overflow(String),

    #[error("estimator {estimator} needs context: {reason}")]
    MissingContext { estimator: &'static str, reason: String },

    #[error("sequence needs {required} tokens but capacity is {capacity}")]
    Capacity { required: usize, capacity: usize },

    #[error("unsupported schema: {0}")]
    Unsupported(String),

    #[error("invalid model config: {0}")]
    Config(String),

    #[error("invalid model input: {0}")]
    Input(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),

    #[error("malformed {what}: {reason}")]
    Format { what: String, reason: String },

    #[error("generation budget exhausted after {attempts} attempts ({accepted}/{target} accepted)")]
    BudgetExhausted {
        attempts: usize,
        accepted: usize,
        target: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            what: what.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for command-line front ends: 2 for data errors,
    /// 3 for budget and validation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExhausted { .. } | Error::Training(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
