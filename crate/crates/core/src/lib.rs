//! Full-batch graph neural network aggregation engine.
//!
//! * [`graph`], [`features`], [`ops`]: CSR graphs, dense feature matrices and
//!   the `⊕(⊗(x, y), z)` operator algebra with a reference aggregation loop.
//! * [`kernel`]: source-blocked, dynamically scheduled aggregation and an
//!   analytic memory-traffic model.
//! * [`partition`]: greedy vertex-cut edge partitioning, local/global ID
//!   maps and randomized split trees.
//! * [`drpa`]: the `0c`, `cd-0` and `cd-r` distributed aggregation schemes
//!   on an in-process cluster of ranks.
//! * [`model`]: GraphSAGE with the GCN aggregator, full-batch training and
//!   work/memory estimators.

pub mod drpa;
pub mod element;
pub mod error;
pub mod features;
pub mod gen;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod model;
pub mod ops;
pub mod partition;

pub use element::{Dtype, Element};
pub use error::{Error, Result};
pub use features::FeatureMatrix;
pub use graph::CsrGraph;
pub use ops::{BinaryOp, OperatorSpec, ReduceOp};
