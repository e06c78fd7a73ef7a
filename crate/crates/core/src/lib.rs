//! Deterministic simulator for curriculum-guided personalized subgraph
//! federated learning.
//!
//! Clients train two-layer GCNs on their private subgraphs while an
//! incremental edge-selection curriculum grows a learnable edge mask from
//! easy (well-reconstructed) edges towards hard ones. The server feeds a
//! shared random reference graph through every client model, learns one
//! mask per client on it, and compares those masks with linear CKA to get
//! client similarities. Each client then receives its own softmax-weighted
//! mixture of the trained parameters.
//!
//! Module map:
//!
//! - [`graph`]: graph model, random generators, partitioners, splits, CSV IO
//! - [`gcn`]: GCN forward/backward, proximal loss, Adam
//! - [`ies`]: edge masks, reconstruction, pacing and mask optimization
//! - [`server`]: reference graph, indicators, CKA, aggregation, adaptive τ
//! - [`fedsim`]: round orchestration, baselines, metrics and run outputs
//! - [`cli`]: configuration loading and the `generate`/`run`/`analyze` commands

pub mod cli;
pub mod error;
pub mod fedsim;
pub mod gcn;
pub mod graph;
pub mod ies;
pub mod rng;
pub mod server;

pub use error::{Error, Result};
