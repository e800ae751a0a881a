//! Proof generators: constant-space cutting planes refutations of lifted
//! pebbling formulas and short tree-like semantic refutations.

mod builder;
mod coding;
mod space;
mod treelike;

use thiserror::Error;

pub use builder::{Builder, Id, Literal};
pub use coding::{
    eq_linear_spec, gen_coding_append, gen_coding_extract, gen_coding_propagate, gen_refutation_lifted_pebbling,
    gen_refutation_lifted_pebbling_split, lifted_pebbling_cnf, Fragment, LinearGadgetSpec,
};
pub use space::{
    accumulate, check_implication, derive_clause, falsified_clause, gen_accumulator, gen_clause_derivation,
    gen_falsified_clause, weaken_to_falsified, Source,
};
pub use treelike::{blob_graph, gen_treelike_semantic};

use crate::cnf::CnfError;
use crate::dag::DagError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("the assignment satisfies every axiom")]
    AllSatisfied,
    #[error("premises do not imply the clause; counterexample sets {witness:?} true")]
    NotImplied { witness: Vec<usize> },
    #[error("axiom provider failed at α = {alpha}: {source}")]
    Provider { alpha: u64, source: Box<GenError> },
    #[error("gadget is not supported: {0}")]
    UnsupportedGadget(String),
    #[error("internal construction error: {0}")]
    Internal(String),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Metrics sidecar for a generated proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenMetrics {
    pub generator: String,
    pub length: usize,
    pub line_space: usize,
    pub coeff_bits: u64,
    pub n: usize,
    pub q: usize,
    pub k: usize,
    pub constants_version: u32,
}
