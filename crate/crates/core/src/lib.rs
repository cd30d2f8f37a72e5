//! Toolkit for the action language BC+.
//!
//! Parses BC+ programs, expands causal-law shorthands, grounds them over
//! finite sort domains, compiles the result to a time-indexed satisfiability
//! problem, and answers planning and prediction queries. A brute-force
//! transition-system oracle provides independent ground truth, and the
//! pipeline module orchestrates program synthesis against a pluggable
//! language-model client.

pub mod ast;
pub mod diag;
pub mod parser;
