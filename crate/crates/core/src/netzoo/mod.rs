//! Reference networks, the synthetic dataset, training, and per-layer
//! statistic extraction.

mod dataset;
mod net;
mod stats;
mod train;

use thiserror::Error;

use crate::tensor::TensorError;

pub use dataset::{
    make_dataset, make_dataset_with_calib, Batch, Split, SyntheticDataset, DEFAULT_CALIB_SIZE, IMAGE_SIDE,
};
pub use net::{accuracy_of, argmax, build_net, Arch, ForwardPass, LayerKind, Post, QuantLayer, ReferenceNet};
pub use stats::{extract_stats, LayerHessian, LayerMeta, LayerStats, NetHessian, StatKind, DEFAULT_HUTCHINSON_PROBES};
pub use train::{train, TrainConfig, TrainReport};

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("unknown architecture `{0}` (expected mlp-s or cnn-s)")]
    UnknownArch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged in epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("non-finite {kind} statistic in layer {layer}")]
    NonFiniteStat { layer: usize, kind: StatKind },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
