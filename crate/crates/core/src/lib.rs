//! Positive-unlabeled node classification on graphs.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO: graphs,
//! the distance partition of unlabeled nodes, a two-layer GCN with exact
//! reverse-mode gradients, the PU losses and structural regularizer, the
//! Adam trainer and the evaluation metrics. File formats, checkpoints and
//! the experiment harness live in the `pugnn` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod loss;
pub mod math;
pub mod metrics;
pub mod optim;
pub mod sampler;
pub mod tensor;
pub mod train;

pub use dataset::{BinaryMapping, PUDataset};
pub use error::{Error, Result};
pub use gcn::{ForwardCache, ParamStore, HIDDEN_DIM};
pub use graph::{DistancePartition, Graph, NormalizedAdjacency, NodeId, UNREACHABLE};
pub use loss::{LossConfig, LossKind, LossValue, RegScale};
pub use metrics::{ConfusionCounts, F1Scores};
pub use sampler::{NegativeSampler, NegativeSet};
pub use tensor::DenseMatrix;
pub use train::{EpochRecord, TrainConfig, TrainFailure, TrainOutcome};
