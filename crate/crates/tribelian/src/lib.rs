//! An automaton-algebra engine for the Tribonacci numeration system.
//!
//! The crate builds, from scratch, the chain of synchronized automata that
//! computes the abelian complexity of the infinite Tribonacci word
//! `TR = 0102010...` (fixed point of `0 -> 01, 1 -> 02, 2 -> 0`), ending in
//! two DFAOs: one mapping `n` to the least index with the same set of
//! relative Parikh vectors, and one mapping `n` to the abelian complexity
//! itself.
//!
//! Modules, roughly bottom-up:
//!
//! * [`automata`] — multi-track automata over `{0,1}^k` and the closure
//!   operations needed for first-order quantifier elimination.
//! * [`numeration`] — Tribonacci representations, the addition relation,
//!   ordering and shift relations.
//! * [`worddfao`] — DFAOs for `TR` and its last-digit helper `TRL`.
//! * [`relations`] — named-variable relation algebra plus a small textual
//!   query language mirroring the usual theorem-prover syntax.
//! * [`oracle`] — automaton-free ground truth by direct counting.
//! * [`pipeline`] — the end-to-end construction and its artifacts.
//! * [`walnut`] — the plain-text automaton serialization format.

pub mod automata;
pub mod checks;
pub mod formula;
pub mod numeration;
pub mod oracle;
pub mod pipeline;
pub mod relations;
pub mod walnut;
pub mod worddfao;
