//! Analytical cycle/energy cost model and dataflow taxonomy for GNN
//! accelerator design-space exploration.
//!
//! A GNN layer is two phases: aggregation (SpMM with the adjacency
//! structure) and combination (dense GEMM with the weight matrix). This
//! crate models the cost of a layer under a dataflow described as
//! `<Inter>_<order>(<AggIntra>, <CmbIntra>)`: intra-phase loop orders and
//! tile sizes for both phases plus an inter-phase strategy (sequential,
//! sequential pipeline, or parallel pipeline).
//!
//! The heavy loops (per-tile phase costing, sweep evaluation) run on rayon
//! when the default `parallel` feature is enabled; disabling it falls back
//! to sequential code with identical results.

pub mod energy;
pub mod error;
pub mod graph;
pub mod interphase;
pub mod oracle;
pub mod phase;
pub mod sweep;
pub mod taxonomy;

pub use error::{Error, Result};
