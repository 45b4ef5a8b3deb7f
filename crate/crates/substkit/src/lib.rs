//! Combinatorics of substitutions of constant length: structural invariants
//! (primitivity, column number, height, pure base), the synchronizing
//! tower of joined and group-extended substitutions, and sieve-backed
//! correlation experiments against multiplicative arithmetic functions.

pub mod arith;
pub mod error;
pub mod fixtures;
pub mod joinings;
pub mod structure;
pub mod subst;

pub use error::{Error, Result};
pub use subst::{FixedPointHandle, IncidenceMatrix, Substitution, Symbol, Word, DEFAULT_WORD_LIMIT};
