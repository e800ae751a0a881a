//! Proof-complexity workbench.
//!
//! Pebbling formulas and their gadget liftings, Nullstellensatz certificates
//! and designs, reversible pebbling, decision trees, exact rank experiments,
//! and a cutting-planes verifier together with explicit proof generators.
//!
//! Everything here is exact: big integers, prime fields, and exhaustive
//! oracles at desk scale.

pub mod calibration;
pub mod cnf;
pub mod cp;
pub mod dag;
pub mod field;
pub mod gen;
pub mod lift;
pub mod ns;
pub mod pebbling;
pub mod poly;
pub mod rank;
pub mod search;

pub use cnf::{Clause, Cnf, Lit};
pub use dag::Dag;
pub use lift::Gadget;
pub use pebbling::{Mode, PebblingSequence};

/// Iterate the set bits of a mask, lowest first.
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}
