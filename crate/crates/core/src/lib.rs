//! Node classification with learnable graph convolutional layers (LGCL).
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds the CSR graph, adjacency normalisation and induced
//!   sub-graphs.
//! * [`tensor`], [`tape`] and [`gradcheck`] form a small reverse-mode
//!   differentiation engine over dense `f64` arrays.
//! * [`layers`] implements the GCN layer, the linear graph embedding, the
//!   k-largest neighbour selection and the learnable graph convolutional
//!   layer (LGCL) that runs a 1-D CNN over the selected neighbourhood.
//! * [`sampler`] grows training sub-graphs by breadth-first expansion.
//! * [`model`], [`optim`], [`metrics`] and [`train`] assemble and fit the
//!   full network.
//! * [`data`] reads and writes the plain-text dataset and checkpoint
//!   formats, builds splits and generates planted-partition graphs.
//! * [`cli`] backs the `lgcn` binary.

pub mod cli;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod layers;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod sampler;
pub mod tape;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use graph::{Adjacency, Graph, Labels, Masks, NormalizedAdjacency, Split, SubGraph};
pub use model::{EmbeddingKind, LayerKind, Model, ModelConfig};
pub use tape::{ParamId, ParamStore, Tape, Var};
pub use tensor::Tensor;
pub use train::{fit, Batching, TrainConfig, TrainOutcome};

/// Deterministic random stream used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Seeds a [`Rng`].
pub fn rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
