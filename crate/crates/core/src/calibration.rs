//! Frozen constants for the length and space envelopes of the generators.
//!
//! Each value was measured once on the instances exercised by the test suite
//! and then fixed; raising one requires bumping [`CONSTANTS_VERSION`].

pub const CONSTANTS_VERSION: u32 = 1;

/// Falsified-clause step: line space.
pub const S_B2: usize = 3;
/// Falsified-clause step: length ≤ C_B2 · n.
pub const C_B2: usize = 6;

/// Accumulator: line space, provider included, for single-line providers.
pub const S_B1: usize = 6;
/// Accumulator: length ≤ C_B1 · n² · B + provider lengths. Each increment
/// re-trims the accumulator once per bit, hence the n².
pub const C_B1: usize = 12;

/// Clause derivation: line space with raw premises.
pub const S_SL: usize = 5;
/// Clause derivation: length ≤ C_SL · n² · 2ⁿ.
pub const C_SL: usize = 24;

/// Lifted pebbling refutation with one bundle, k = 2, EQ_1 or EQ_2.
pub const S_REF: usize = 11;
/// Lifted pebbling refutation on paths: length ≤ C_REF · n².
pub const C_REF: usize = 16_000;

/// Tree-like semantic refutation: length ≤ C_TL · n · q · 2^q.
pub const C_TL: usize = 40;

/// Largest coefficient bit length admitted by the CP* check.
pub const CP_STAR_BITS: u64 = 32;
