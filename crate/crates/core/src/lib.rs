//! Time-indexed heap invariant encodings for a small imperative language with
//! uninterpreted predicates.
//!
//! The crate parses UPLang programs ([`ast`]), executes them under a given
//! predicate interpretation ([`interp`]), computes least fixed-point
//! interpretations and bounded safety verdicts ([`fixpoint`]), rewrites heap
//! programs into heap-free programs over the predicates `R` and `W`
//! ([`encode`]), and emits constrained Horn clauses ([`chc`]).

pub mod ast;
pub mod chc;
pub mod cli;
pub mod corpus;
pub mod int;
pub mod encode;
pub mod fixpoint;
pub mod interp;
