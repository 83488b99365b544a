//! Heuristic learners: a message-passing GNN for successor measures and an
//! attention encoder for item measures, with checkpoint persistence.

mod features;
mod gnn;
mod layers;
mod transformer;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use features::{item_feature_width, item_features, node_feature_width, GraphInput};
pub use gnn::{Embeddings, Gnn, GnnConfig};
pub use transformer::{ItemEncoder, TransformerConfig};

use crate::autodiff::{Checkpoint, ParamStore, Tape, Var};
use crate::error::{Error, Result};
use crate::problem::{ConstructionGraph, HeuristicField, Instance, PheromoneModel, ProblemKind, Provenance};
use crate::scalar::Scalar;

pub const MODEL_FORMAT: &str = "colony-model";
/// Normalization recorded in checkpoints: per-row feature normalization
/// with learned gain and bias, in place of batch statistics.
pub const NORMALIZATION: &str = "layer";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Architecture {
    Gnn(GnnConfig),
    Transformer(TransformerConfig),
}

impl Architecture {
    pub fn model(&self) -> PheromoneModel {
        match self {
            Architecture::Gnn(_) => PheromoneModel::Successor,
            Architecture::Transformer(_) => PheromoneModel::Items,
        }
    }

    pub fn heads(&self) -> usize {
        match self {
            Architecture::Gnn(c) => c.heads,
            Architecture::Transformer(_) => 1,
        }
    }
}

/// Everything needed to rebuild a model's parameter layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ProblemKind,
    pub architecture: Architecture,
    pub input_width: usize,
    pub normalization: String,
    pub seed: u64,
}

impl ModelSpec {
    /// Spec whose input widths match `instance`.
    pub fn for_instance(instance: &Instance, architecture: Architecture, seed: u64) -> Result<Self> {
        let input_width = match architecture {
            Architecture::Gnn(_) => node_feature_width(instance),
            Architecture::Transformer(_) => item_feature_width(instance)?,
        };
        Ok(Self {
            kind: instance.kind(),
            architecture,
            input_width,
            normalization: NORMALIZATION.to_string(),
            seed,
        })
    }

    pub fn model(&self) -> PheromoneModel {
        self.architecture.model()
    }
}

#[derive(Serialize, Deserialize)]
struct ModelMetadata {
    format: String,
    spec: ModelSpec,
}

#[derive(Clone, Debug)]
enum Net {
    Gnn(Gnn),
    Items(ItemEncoder),
}

/// A heuristic learner with its parameters.
#[derive(Clone, Debug)]
pub struct HeuristicModel<S: Scalar = f64> {
    spec: ModelSpec,
    store: ParamStore<S>,
    net: Net,
}

impl<S: Scalar> HeuristicModel<S> {
    /// Freshly initialized parameters drawn from `spec.seed`.
    pub fn new(spec: ModelSpec) -> Result<Self> {
        if spec.normalization != NORMALIZATION {
            return Err(Error::InvalidArgument(format!("unknown normalization `{}`", spec.normalization)));
        }
        if !spec.kind.supports(spec.model()) {
            return Err(Error::Unsupported {
                kind: spec.kind,
                what: "the item pheromone model",
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut store = ParamStore::new();
        let net = match spec.architecture {
            Architecture::Gnn(c) => Net::Gnn(Gnn::new(&mut store, c, spec.input_width, 1, &mut rng)?),
            Architecture::Transformer(c) => {
                Net::Items(ItemEncoder::new(&mut store, c, spec.input_width, &mut rng)?)
            }
        };
        Ok(Self { spec, store, net })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn heads(&self) -> usize {
        self.spec.architecture.heads()
    }

    pub fn model(&self) -> PheromoneModel {
        self.spec.model()
    }

    pub fn store(&self) -> &ParamStore<S> {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore<S> {
        &mut self.store
    }

    pub fn gnn(&self) -> Option<&Gnn> {
        match &self.net {
            Net::Gnn(g) => Some(g),
            Net::Items(_) => None,
        }
    }

    pub fn item_encoder(&self) -> Option<&ItemEncoder> {
        match &self.net {
            Net::Items(e) => Some(e),
            Net::Gnn(_) => None,
        }
    }

    /// Errors unless `instance` has the kind and feature widths the model
    /// was built for.
    pub fn check_instance(&self, instance: &Instance) -> Result<()> {
        let expected = ModelSpec::for_instance(instance, self.spec.architecture, self.spec.seed)?;
        if expected.kind != self.spec.kind || expected.input_width != self.spec.input_width {
            return Err(Error::InvalidArgument(format!(
                "model was built for {} with {} input features; instance is {} with {}",
                self.spec.kind, self.spec.input_width, expected.kind, expected.input_width
            )));
        }
        Ok(())
    }

    /// Records the forward pass and returns one measure column per head.
    pub fn forward(&self, tape: &mut Tape<S>, instance: &Instance, graph: &ConstructionGraph) -> Result<Vec<Var>> {
        self.check_instance(instance)?;
        match &self.net {
            Net::Gnn(g) => {
                let input = GraphInput::new(instance, graph)?;
                let emb = g.embed(tape, &self.store, &input)?;
                (0..g.config().heads)
                    .map(|k| g.decode_edges(tape, &self.store, &input, emb, k))
                    .collect()
            }
            Net::Items(e) => {
                let features = item_features(instance)?;
                Ok(vec![e.encode(tape, &self.store, &features)?])
            }
        }
    }

    /// Heuristic fields (one per head) for inference.
    pub fn fields(&self, instance: &Instance, graph: &ConstructionGraph) -> Result<Vec<HeuristicField>> {
        let mut tape = Tape::new();
        let heads = self.forward(&mut tape, instance, graph)?;
        let many = heads.len() > 1;
        heads
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                let provenance = if many { Provenance::LearnedHead(k) } else { Provenance::Learned };
                HeuristicField::new(self.model(), tape.value(v).to_f64(), provenance)
            })
            .collect()
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        let meta = ModelMetadata {
            format: MODEL_FORMAT.to_string(),
            spec: self.spec.clone(),
        };
        Checkpoint::from_store(&self.store, &meta)
    }

    /// Rebuilds the model described by the checkpoint metadata and loads
    /// its parameters; shape or name mismatches are errors.
    pub fn from_checkpoint(checkpoint: &Checkpoint) -> Result<Self> {
        let meta: ModelMetadata = checkpoint.metadata()?;
        if meta.format != MODEL_FORMAT {
            return Err(Error::Checkpoint(format!("not a model checkpoint: `{}`", meta.format)));
        }
        let mut model = Self::new(meta.spec)?;
        checkpoint.load_into(&mut model.store)?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_checkpoint()?.save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}
