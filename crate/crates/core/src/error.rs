use thiserror::Error;

use crate::safety::SafetyVerdict;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ingest error at row {row}: {message}")]
    Ingest { row: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown table `{0}`")]
    Catalog(String),

    #[error("plan type error: {0}")]
    PlanType(String),

    #[error("type error: {0}")]
    Type(String),

    #[error("invalid operand: {0}")]
    Operand(String),

    #[error("invalid visual mapping: {0}")]
    Mapping(String),

    #[error("unsafe composition: {}", summarize(.0))]
    Safety(Box<SafetyVerdict>),

    #[error("unsafe composition for {} pair(s): {}", .0.len(), pairs(.0))]
    SafetyPairs(Vec<FailedPair>),

    #[error(
        "view `{view}` is not in canonical form; n-ary statistical composition needs gamma(q) with aggregation-free q"
    )]
    Closure { view: String },

    #[error("join produced no matching rows: {0}")]
    EmptyJoin(String),

    #[error("model view has no fitted models")]
    EmptyModel,

    #[error("query plan node cannot be lowered to SQL: {0}")]
    UnsupportedNode(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One rejected pair from an all-or-nothing cross composition.
#[derive(Debug, Clone)]
pub struct FailedPair {
    pub left: String,
    pub right: String,
    pub verdict: SafetyVerdict,
}

fn summarize(v: &SafetyVerdict) -> String {
    let msgs: Vec<&str> = v.warnings.iter().map(|w| w.message.as_str()).collect();
    format!("{:?}: {}", v.status, msgs.join("; "))
}

fn pairs(p: &[FailedPair]) -> String {
    p.iter()
        .map(|f| format!("({}, {}) {}", f.left, f.right, summarize(&f.verdict)))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn plan_type(msg: impl Into<String>) -> Self {
        Error::PlanType(msg.into())
    }

    pub(crate) fn operand(msg: impl Into<String>) -> Self {
        Error::Operand(msg.into())
    }
}
