use thiserror::Error;

use crate::problem::ProblemKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: [usize; 2],
        rhs: [usize; 2],
    },
    #[error("{op}: non-finite value in forward pass")]
    NonFinite { op: &'static str },
    #[error("{op}: non-finite gradient in backward pass")]
    NonFiniteGrad { op: &'static str },
    #[error("loss must be a 1x1 scalar, got {shape:?}")]
    NonScalarLoss { shape: [usize; 2] },
    #[error("variable belongs to a different tape or does not exist")]
    UnknownVar,
    #[error("duplicate parameter name `{0}`")]
    DuplicateParam(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("layer {layer}: {source}")]
    Layer { layer: usize, source: Box<Error> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{kind} does not support {what}")]
    Unsupported {
        kind: ProblemKind,
        what: &'static str,
    },
    #[error("infeasible solution: {0}")]
    Infeasible(String),
    #[error("construction dead end at step {step}: no feasible component")]
    DeadEnd { step: usize },
    #[error("inconsistent construction state: {0}")]
    InconsistentState(String),
    #[error("pheromone deposit undefined for objective {0}")]
    NonPositiveObjective(f64),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_layer(self, layer: usize) -> Self {
        Error::Layer {
            layer,
            source: Box::new(self),
        }
    }
}
