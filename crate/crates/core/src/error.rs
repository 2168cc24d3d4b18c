use thiserror::Error;

use crate::biset::Biset;

/// A demand pair the graph cannot satisfy, with a minimum cut witnessing it.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Certificate {
    pub pair: (usize, usize),
    pub required: u32,
    pub achieved: u32,
    pub cut: Biset,
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "pair ({}, {}) needs {} but has {}; cut {}",
            self.pair.0, self.pair.1, self.required, self.achieved, self.cut
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("dangling demand endpoint {0}")]
    DanglingDemand(usize),
    #[error("demand endpoint not reliable: {0}")]
    UnreliableDemand(usize),
    #[error("infeasible instance: {0}")]
    Infeasible(Box<Certificate>),
    #[error("infeasible cover: violated bisets remain but no vertex can cover them")]
    Uncoverable,
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("biset outside the function domain: {0}")]
    Domain(String),
    #[error("{what} too large for enumeration: {size} > {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("overlapping bisets {0} and {1}")]
    Overlapping(Box<Biset>, Box<Biset>),
    #[error("generator: {0}")]
    Generator(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
