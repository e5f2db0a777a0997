//! Minimal dense-tensor reverse-mode autodiff: tensors, a tape graph,
//! layers, losses, Adam, checkpointing and gradient checking.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod graph;
pub mod init;
pub mod layers;
pub mod param;
pub mod tensor;

pub use adam::Adam;
pub use gradcheck::grad_check;
pub use graph::{Graph, NodeId};
pub use layers::{one_hot_batch, Linear};
pub use param::Param;
pub use tensor::Tensor;

use thiserror::Error;

/// Errors from the numeric core.
#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
    #[error("index {index} out of range {bound} in {op}")]
    IndexOutOfRange { op: &'static str, index: usize, bound: usize },
    #[error("empty batch passed to {op}")]
    EmptyBatch { op: &'static str },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
