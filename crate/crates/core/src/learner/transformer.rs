use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{LayerNorm, Linear, Mlp3};
use crate::autodiff::{ParamStore, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransformerConfig {
    pub layers: usize,
    pub hidden: usize,
    pub attention_heads: usize,
    pub feedforward: usize,
    pub decoder_width: usize,
}

impl Default for TransformerConfig {
    fn default() -> Self {
        Self {
            layers: 3,
            hidden: 32,
            attention_heads: 2,
            feedforward: 64,
            decoder_width: 32,
        }
    }
}

impl TransformerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0
            || self.attention_heads == 0
            || self.hidden < 2
            || !self.hidden.is_multiple_of(self.attention_heads)
            || self.feedforward == 0
            || self.decoder_width == 0
        {
            return Err(Error::InvalidArgument(format!(
                "transformer needs layers >= 1 and hidden divisible by attention heads; got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct AttentionHead {
    q: Linear,
    k: Linear,
    v: Linear,
}

#[derive(Clone, Debug)]
struct EncoderLayer {
    heads: Vec<AttentionHead>,
    out: Linear,
    attn_norm: LayerNorm,
    ff_in: Linear,
    ff_out: Linear,
    ff_norm: LayerNorm,
}

/// Post-norm self-attention encoder without positional encoding, plus a
/// position-wise decoder to one measure per item.
#[derive(Clone, Debug)]
pub struct ItemEncoder {
    config: TransformerConfig,
    input: Linear,
    layers: Vec<EncoderLayer>,
    decoder: Mlp3,
}

impl ItemEncoder {
    pub fn new<S: Scalar>(
        store: &mut ParamStore<S>,
        config: TransformerConfig,
        features: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        config.validate()?;
        let d = config.hidden;
        let dk = d / config.attention_heads;
        let input = Linear::new(store, "items.input", features, d, true, rng)?;
        let layers = (0..config.layers)
            .map(|l| {
                let name = |p: &str| format!("items.layer{l}.{p}");
                let heads = (0..config.attention_heads)
                    .map(|a| {
                        Ok(AttentionHead {
                            q: Linear::new(store, &name(&format!("head{a}.q")), d, dk, true, rng)?,
                            k: Linear::new(store, &name(&format!("head{a}.k")), d, dk, true, rng)?,
                            v: Linear::new(store, &name(&format!("head{a}.v")), d, dk, true, rng)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(EncoderLayer {
                    heads,
                    out: Linear::new(store, &name("out"), d, d, true, rng)?,
                    attn_norm: LayerNorm::new(store, &name("attn_norm"), d)?,
                    ff_in: Linear::new(store, &name("ff_in"), d, config.feedforward, true, rng)?,
                    ff_out: Linear::new(store, &name("ff_out"), config.feedforward, d, true, rng)?,
                    ff_norm: LayerNorm::new(store, &name("ff_norm"), d)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let decoder = Mlp3::new(store, "items.decoder", d, config.decoder_width, rng)?;
        Ok(Self {
            config,
            input,
            layers,
            decoder,
        })
    }

    pub fn config(&self) -> &TransformerConfig {
        &self.config
    }

    /// Measures in `(0, 1)` per item as an `items x 1` column.
    pub fn encode<S: Scalar>(&self, tape: &mut Tape<S>, store: &ParamStore<S>, features: &Tensor<S>) -> Result<Var> {
        let x = tape.constant(features.clone())?;
        let mut h = self.input.apply(tape, store, x)?;
        let scale = S::one() / S::of((self.config.hidden / self.config.attention_heads) as f64).sqrt();
        for (l, layer) in self.layers.iter().enumerate() {
            h = layer.forward(tape, store, h, scale).map_err(|e| e.in_layer(l))?;
        }
        self.decoder.apply(tape, store, h)
    }
}

impl EncoderLayer {
    fn forward<S: Scalar>(&self, tape: &mut Tape<S>, store: &ParamStore<S>, h: Var, scale: S) -> Result<Var> {
        let mut parts = Vec::with_capacity(self.heads.len());
        for head in &self.heads {
            let q = head.q.apply(tape, store, h)?;
            let k = head.k.apply(tape, store, h)?;
            let v = head.v.apply(tape, store, h)?;
            let kt = tape.transpose(k)?;
            let scores = tape.matmul(q, kt)?;
            let scores = tape.scale(scores, scale)?;
            let attn = tape.softmax_rows(scores)?;
            parts.push(tape.matmul(attn, v)?);
        }
        let cat = tape.concat_cols(&parts)?;
        let o = self.out.apply(tape, store, cat)?;
        let r = tape.add(h, o)?;
        let h = self.attn_norm.apply(tape, store, r)?;
        let f = self.ff_in.apply(tape, store, h)?;
        let f = tape.silu(f)?;
        let f = self.ff_out.apply(tape, store, f)?;
        let r = tape.add(h, f)?;
        self.ff_norm.apply(tape, store, r)
    }
}
