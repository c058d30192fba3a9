//! Exact detection of equivalences between linear first-order optimization
//! algorithms.
//!
//! Algorithms are written in a small update-equation language
//! ([`dsl`]), compiled to state-space realizations ([`realization`]) and
//! compared through their transfer matrices ([`equivalence`]) under oracle
//! relabeling, cyclic permutation, conjugation and repetition
//! ([`transforms`]). Every verdict carries a witness that can be replayed
//! symbolically and cross-checked numerically ([`numeric`]).

pub mod dsl;
pub mod equivalence;
pub mod error;
pub mod library;
pub mod numeric;
pub mod realization;
pub mod symbolic;
pub mod transforms;

pub use error::{Error, Result};
