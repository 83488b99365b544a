//! Minimal reverse-mode differentiation over dense matrices.

mod checkpoint;
mod params;
mod tape;
mod tensor;

pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_VERSION};
pub use params::{AdamConfig, Param, ParamId, ParamStore};
pub use tape::{CategoricalEvents, Gradients, Tape, Var};
pub use tensor::Tensor;
