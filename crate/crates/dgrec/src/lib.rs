//! Diversified graph-based recommendation engine.
//!
//! The pipeline: ingest or synthesize interaction data ([`dataset`]), build a
//! compressed bipartite graph ([`graph`]), pick diversified neighbor subsets
//! by greedy submodular maximization ([`submodular`]), propagate embeddings
//! with light graph convolution and a layer-attention readout ([`model`]),
//! train with a class-balanced BPR objective and Adam ([`training`]), and
//! measure Recall / Hit Ratio / category Coverage at top-K ([`evaluation`]).
//!
//! Everything is deterministic given (data, config, seed), including under
//! internal parallelism.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod matrix;
pub mod model;
pub mod seed;
pub mod submodular;
pub mod training;

pub use dataset::{InteractionLog, SplitBundle, SplitStrategy, SyntheticSpec};
pub use error::{Error, Result};
pub use evaluation::{MetricsReport, Scorer};
pub use graph::{BipartiteGraph, CategoryMap, IdMaps, SelectedNeighborhoods};
pub use matrix::Matrix;
pub use model::{
    Checkpoint, DegreeNormMode, Forward, ForwardConfig, ModelParams, ReadoutMode,
};
pub use submodular::{KernelConfig, SelectionState, SubmodularChoice};
pub use training::{FitOutput, SelectionSource, SubmodularVariant, TrainConfig, TrainLog};
