//! Structure learning for cause-and-effect graphs in tiered process data.
//!
//! The crate implements the full discovery pipeline for causal additive
//! models over tabular measurements:
//!
//! 1. [`dataset`] / [`table`] — ingestion-side preprocessing: hierarchical
//!    part merges, mean imputation, constant removal, standardization.
//! 2. [`pns`] — preliminary neighborhood selection via cross-validated
//!    LASSO, restricted by prior knowledge.
//! 3. [`ordering`] — greedy node-ordering search scored by penalized
//!    additive regressions, with optional tier-initialized across-station
//!    edges (`tcam` mode).
//! 4. [`pruning`] — significance-based edge selection on the ordered graph.
//! 5. [`semgen`] / [`metrics`] — synthetic ground-truth generation and
//!    graph-quality metrics backing every statistical claim.
//!
//! The crate is `no_std` + `alloc`: all numerics go through [`libm`] and
//! pure-Rust [`nalgebra`] factorizations, and nothing here performs IO.
//! File formats, CSV/JSON handling and the command-line front end live in
//! the companion `tcam-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod bitset;
mod special;
mod stat;

pub mod dataset;
pub mod graph;
pub mod lasso;
pub mod metrics;
pub mod ordering;
pub mod parallel;
pub mod pipeline;
pub mod pns;
pub mod prior;
pub mod pruning;
pub mod semgen;
pub mod smooth;
pub mod table;

pub use dataset::Dataset;
pub use graph::{Dag, NodeOrdering};
pub use prior::PriorKnowledge;
