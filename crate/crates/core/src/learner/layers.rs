use rand::Rng;

use crate::autodiff::{ParamId, ParamStore, Tape, Tensor, Var};
use crate::error::Result;
use crate::scalar::Scalar;

/// Affine map `x W + b` with `W: in x out` and optional bias row.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Linear {
    pub w: ParamId,
    pub b: Option<ParamId>,
}

impl Linear {
    pub fn new<S: Scalar>(
        store: &mut ParamStore<S>,
        name: &str,
        input: usize,
        output: usize,
        bias: bool,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let w = store.add_uniform(format!("{name}.w"), input, output, input, rng)?;
        let b = if bias {
            Some(store.add_uniform(format!("{name}.b"), 1, output, input, rng)?)
        } else {
            None
        };
        Ok(Self { w, b })
    }

    pub fn apply<S: Scalar>(&self, tape: &mut Tape<S>, store: &ParamStore<S>, x: Var) -> Result<Var> {
        let w = tape.param(store, self.w)?;
        let y = tape.matmul(x, w)?;
        match self.b {
            Some(b) => {
                let b = tape.param(store, b)?;
                tape.add_row(y, b)
            }
            None => Ok(y),
        }
    }
}

/// Row normalization followed by a learned gain and bias.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LayerNorm {
    pub gain: ParamId,
    pub bias: ParamId,
}

impl LayerNorm {
    pub fn new<S: Scalar>(store: &mut ParamStore<S>, name: &str, width: usize) -> Result<Self> {
        Ok(Self {
            gain: store.add(format!("{name}.gain"), Tensor::filled(1, width, S::one()))?,
            bias: store.add(format!("{name}.bias"), Tensor::zeros(1, width))?,
        })
    }

    pub fn apply<S: Scalar>(&self, tape: &mut Tape<S>, store: &ParamStore<S>, x: Var) -> Result<Var> {
        let n = tape.norm_rows(x)?;
        let g = tape.param(store, self.gain)?;
        let b = tape.param(store, self.bias)?;
        let y = tape.mul_row(n, g)?;
        tape.add_row(y, b)
    }
}

/// `Linear → SiLU → Linear → SiLU → Linear → sigmoid`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Mlp3 {
    pub layers: [Linear; 3],
}

impl Mlp3 {
    pub fn new<S: Scalar>(
        store: &mut ParamStore<S>,
        name: &str,
        input: usize,
        width: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        Ok(Self {
            layers: [
                Linear::new(store, &format!("{name}.0"), input, width, true, rng)?,
                Linear::new(store, &format!("{name}.1"), width, width, true, rng)?,
                Linear::new(store, &format!("{name}.2"), width, 1, true, rng)?,
            ],
        })
    }

    pub fn apply<S: Scalar>(&self, tape: &mut Tape<S>, store: &ParamStore<S>, x: Var) -> Result<Var> {
        let a = self.layers[0].apply(tape, store, x)?;
        let a = tape.silu(a)?;
        let b = self.layers[1].apply(tape, store, a)?;
        let b = tape.silu(b)?;
        let c = self.layers[2].apply(tape, store, b)?;
        tape.sigmoid(c)
    }
}
