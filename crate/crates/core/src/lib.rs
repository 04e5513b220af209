//! De-naturalizing source rewrites for MiniLang, a small C/Java-like language.
//!
//! The crate parses MiniLang, applies one of six semantics-preserving
//! rewrites per unit, certifies each rewrite by differential execution,
//! emits (rewritten, original) training pairs, and scores reconstructions
//! with exact match, syntax match, dataflow match and CodeBLEU.

pub mod syntax;
pub mod dataflow;
pub mod interp;
pub mod transforms;
pub mod metrics;
pub mod gen;
pub mod pipeline;
pub mod cli;
