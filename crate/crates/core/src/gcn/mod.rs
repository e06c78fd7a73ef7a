//! Two-layer GCN with hand-derived gradients.
//!
//! `H1 = ReLU(Â X W1 + b1)`, `logits = Â H1 W2 + b2`, where `Â` is the
//! symmetrically normalized mask-weighted adjacency with self-loops.

mod adam;
mod adjacency;
mod model;
mod params;

pub use adam::{adam_step, AdamState};
pub use adjacency::{normalize_masked_adjacency, SparseAdj};
pub use model::{accuracy, forward, loss_and_grads, Embeddings};
pub use params::{write_params_csv, GcnParams};
