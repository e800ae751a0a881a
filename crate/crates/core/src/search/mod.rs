//! Falsified-clause search problems: decision trees, parity decision trees,
//! the pebbling correspondence and protocols read off tree-like proofs.

mod dt;
mod pdt;
mod pebble;
mod protocol;
mod sexpr;

use thiserror::Error;

pub use dt::{dt_depth, verify_dt, DecisionTree};
pub use pdt::{pdt_to_ns, verify_pdt, ParityTree};
pub use pebble::{dt_depth_pebbling, dt_to_pebbling, pebbling_to_dt};
pub use protocol::{extract_protocol, LocallyRealProtocol, ProtocolNode, PROTOCOL_EXHAUSTIVE_VARS, PROTOCOL_SAMPLES};

use crate::cnf::CnfError;
use crate::cp::CpError;
use crate::dag::DagError;
use crate::ns::NsError;
use crate::pebbling::PebblingError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("{0} variables exceed the limit of this routine")]
    TooManyVars(usize),
    #[error("formula is satisfiable, e.g. by {witness:?}")]
    Satisfiable { witness: Vec<bool> },
    #[error("variable {0} is out of range")]
    VarOutOfRange(usize),
    #[error("clause index {0} is out of range")]
    BadClause(usize),
    #[error("variable {0} is queried twice on one path")]
    RepeatedQuery(usize),
    #[error("leaf claims clause {clause}, but {witness:?} reaches it and satisfies the clause")]
    WrongLeaf { clause: usize, witness: Vec<bool> },
    #[error("leaf for clause {0}: path polynomial is not divisible by the clause encoding")]
    Division(usize),
    #[error("tree does not fit the pebbling search: {0}")]
    NotPebblingTree(String),
    #[error("proof must be {0}")]
    WrongProofKind(&'static str),
    #[error("protocol node {node} is not covered by its children")]
    Inconsistent { node: usize },
    #[error("protocol fails on input {input:?}: {reason}")]
    ProtocolFails { input: Vec<bool>, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Pebbling(#[from] PebblingError),
    #[error(transparent)]
    Proof(#[from] CpError),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Ns(#[from] NsError),
}
