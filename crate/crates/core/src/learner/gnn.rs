use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::GraphInput;
use super::layers::{LayerNorm, Linear, Mlp3};
use crate::autodiff::{ParamStore, Tape, Var};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GnnConfig {
    pub layers: usize,
    pub hidden: usize,
    pub decoder_width: usize,
    pub heads: usize,
}

impl Default for GnnConfig {
    fn default() -> Self {
        Self {
            layers: 3,
            hidden: 32,
            decoder_width: 32,
            heads: 1,
        }
    }
}

impl GnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden < 2 || self.heads == 0 || self.decoder_width == 0 {
            return Err(Error::InvalidArgument(format!(
                "GNN needs layers >= 1, hidden >= 2, heads >= 1, decoder width >= 1; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Node and edge embeddings after the last message-passing layer.
#[derive(Clone, Copy, Debug)]
pub struct Embeddings {
    pub nodes: Var,
    pub edges: Var,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct GnnLayer {
    pub u: Linear,
    pub v: Linear,
    pub p: Linear,
    pub q: Linear,
    pub r: Linear,
    pub node_norm: LayerNorm,
    pub edge_norm: LayerNorm,
}

/// Anisotropic message passing with edge gates, followed by one MLP
/// decoder per head reading `[e_ij, h_i, h_j]`.
#[derive(Clone, Debug)]
pub struct Gnn {
    config: GnnConfig,
    node_in: Linear,
    edge_in: Linear,
    layers: Vec<GnnLayer>,
    decoders: Vec<Mlp3>,
}

impl Gnn {
    pub fn new<S: Scalar>(
        store: &mut ParamStore<S>,
        config: GnnConfig,
        node_features: usize,
        edge_features: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        config.validate()?;
        let d = config.hidden;
        let node_in = Linear::new(store, "gnn.node_in", node_features, d, true, rng)?;
        let edge_in = Linear::new(store, "gnn.edge_in", edge_features, d, true, rng)?;
        let layers = (0..config.layers)
            .map(|l| {
                let name = |p: &str| format!("gnn.layer{l}.{p}");
                Ok(GnnLayer {
                    u: Linear::new(store, &name("u"), d, d, true, rng)?,
                    v: Linear::new(store, &name("v"), d, d, false, rng)?,
                    p: Linear::new(store, &name("p"), d, d, true, rng)?,
                    q: Linear::new(store, &name("q"), d, d, false, rng)?,
                    r: Linear::new(store, &name("r"), d, d, false, rng)?,
                    node_norm: LayerNorm::new(store, &name("node_norm"), d)?,
                    edge_norm: LayerNorm::new(store, &name("edge_norm"), d)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let decoders = (0..config.heads)
            .map(|k| Mlp3::new(store, &format!("gnn.decoder{k}"), 3 * d, config.decoder_width, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            node_in,
            edge_in,
            layers,
            decoders,
        })
    }

    pub fn config(&self) -> &GnnConfig {
        &self.config
    }

    /// Projected inputs `(h^0, e^0)`.
    pub fn project<S: Scalar>(
        &self,
        tape: &mut Tape<S>,
        store: &ParamStore<S>,
        input: &GraphInput<S>,
    ) -> Result<Embeddings> {
        let x = tape.constant(input.node_features.clone())?;
        let y = tape.constant(input.edge_features.clone())?;
        Ok(Embeddings {
            nodes: self.node_in.apply(tape, store, x)?,
            edges: self.edge_in.apply(tape, store, y)?,
        })
    }

    pub fn embed<S: Scalar>(
        &self,
        tape: &mut Tape<S>,
        store: &ParamStore<S>,
        input: &GraphInput<S>,
    ) -> Result<Embeddings> {
        let mut emb = self.project(tape, store, input)?;
        for (l, layer) in self.layers.iter().enumerate() {
            emb = layer
                .forward(tape, store, input, emb)
                .map_err(|e| e.in_layer(l))?;
        }
        Ok(emb)
    }

    /// Measures in `(0, 1)` for every graph edge from decoder `head`, as an
    /// `edges x 1` column.
    pub fn decode_edges<S: Scalar>(
        &self,
        tape: &mut Tape<S>,
        store: &ParamStore<S>,
        input: &GraphInput<S>,
        emb: Embeddings,
        head: usize,
    ) -> Result<Var> {
        let decoder = self.decoders.get(head).ok_or_else(|| {
            Error::InvalidArgument(format!("head {head} out of range for {} heads", self.decoders.len()))
        })?;
        let hi = tape.gather_rows(emb.nodes, input.sources.clone())?;
        let hj = tape.gather_rows(emb.nodes, input.targets.clone())?;
        let z = tape.concat_cols(&[emb.edges, hi, hj])?;
        decoder.apply(tape, store, z)
    }
}

impl GnnLayer {
    fn forward<S: Scalar>(
        &self,
        tape: &mut Tape<S>,
        store: &ParamStore<S>,
        input: &GraphInput<S>,
        emb: Embeddings,
    ) -> Result<Embeddings> {
        let (h, e) = (emb.nodes, emb.edges);
        // Node update: gated mean over out-neighbors.
        let uh = self.u.apply(tape, store, h)?;
        let vh = self.v.apply(tape, store, h)?;
        let gate = tape.sigmoid(e)?;
        let vj = tape.gather_rows(vh, input.targets.clone())?;
        let msg = tape.mul(gate, vj)?;
        let agg = tape.segment_mean(msg, input.sources.clone(), input.nodes)?;
        let pre = tape.add(uh, agg)?;
        let normed = self.node_norm.apply(tape, store, pre)?;
        let act = tape.silu(normed)?;
        let h_next = tape.add(h, act)?;
        // Edge update.
        let pe = self.p.apply(tape, store, e)?;
        let qh = self.q.apply(tape, store, h)?;
        let rh = self.r.apply(tape, store, h)?;
        let qi = tape.gather_rows(qh, input.sources.clone())?;
        let rj = tape.gather_rows(rh, input.targets.clone())?;
        let s = tape.add(pe, qi)?;
        let s = tape.add(s, rj)?;
        let normed = self.edge_norm.apply(tape, store, s)?;
        let act = tape.silu(normed)?;
        let e_next = tape.add(e, act)?;
        Ok(Embeddings {
            nodes: h_next,
            edges: e_next,
        })
    }
}
