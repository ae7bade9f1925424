//! Training-free condensation of heterogeneous graphs.
//!
//! The pipeline has three stages that run once, without any model training:
//!
//! 1. [`propagation`] averages node features along metapaths using
//!    row-normalized relation matrices.
//! 2. [`condense`] computes a mean vector per class and greedily herds a
//!    budgeted subset of target nodes whose running mean tracks it.
//! 3. [`graph::induced_subgraph`] extracts the selected targets together with
//!    their neighborhood into a small graph that can be saved and reloaded.
//!
//! [`evaluate`] trains a multinomial logistic regression proxy on the
//! condensed graph and scores it on the original test split.

pub mod condense;
pub mod error;
pub mod evaluate;
pub mod graph;
mod par;
pub mod propagation;
pub mod synthetic;

pub use error::{Error, Result};

/// Version string embedded in dataset and run manifests.
pub const TOOL_VERSION: &str = concat!("hgc ", env!("CARGO_PKG_VERSION"));
