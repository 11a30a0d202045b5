use thiserror::Error;

use crate::formula::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("formula syntax error at {0}")]
    Syntax(#[from] ParseError),

    #[error("{file}:{line}: {message}")]
    Format {
        file: String,
        line: usize,
        message: String,
    },

    #[error("relation is not reflexive at point {0}")]
    NotReflexive(String),

    #[error("relation is not transitive: {0} <= {1} and {1} <= {2} but not {0} <= {2}")]
    NotTransitive(String, String, String),

    #[error("operation requires a partial order, but the relation is only a preorder")]
    NotAPoset,

    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    #[error("point index {index} out of range for an order with {len} points")]
    PointIndex { index: usize, len: usize },

    #[error("{what} = {requested} exceeds the configured cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("({s}, {t}, {u}) is not a violating triple: {reason}")]
    NotViolating {
        s: String,
        t: String,
        u: String,
        reason: &'static str,
    },

    #[error("invalid map: {0}")]
    Map(String),

    #[error("invalid proof: {0}")]
    Proof(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
