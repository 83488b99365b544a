use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Param<S> {
    pub name: String,
    pub value: Tensor<S>,
    pub grad: Tensor<S>,
    first_moment: Vec<S>,
    second_moment: Vec<S>,
}

impl<S: Scalar> Param<S> {
    pub fn first_moment(&self) -> &[S] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[S] {
        &self.second_moment
    }
}

/// Named parameters with gradient accumulators and Adam state.
#[derive(Clone, Debug)]
pub struct ParamStore<S> {
    params: Vec<Param<S>>,
    by_name: HashMap<String, ParamId>,
    steps: u64,
    pub adam: AdamConfig,
}

impl<S: Scalar> Default for ParamStore<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> ParamStore<S> {
    pub fn new() -> Self {
        Self {
            params: Vec::new(),
            by_name: HashMap::new(),
            steps: 0,
            adam: AdamConfig::default(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor<S>) -> Result<ParamId> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::DuplicateParam(name));
        }
        let id = ParamId(self.params.len());
        let n = value.len();
        self.params.push(Param {
            grad: Tensor::zeros(value.rows(), value.cols()),
            name: name.clone(),
            value,
            first_moment: vec![S::zero(); n],
            second_moment: vec![S::zero(); n],
        });
        self.by_name.insert(name, id);
        Ok(id)
    }

    /// Adds a `rows x cols` parameter drawn uniformly from `±1/sqrt(fan_in)`.
    pub fn add_uniform(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        fan_in: usize,
        rng: &mut impl Rng,
    ) -> Result<ParamId> {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| S::of(rng.gen_range(-bound..=bound)))
            .collect();
        self.add(name, Tensor::new(rows, cols, data)?)
    }

    pub fn id(&self, name: &str) -> Result<ParamId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Param<S>)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn value(&self, id: ParamId) -> &Tensor<S> {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor<S> {
        &mut self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Tensor<S> {
        &self.params[id.0].grad
    }

    pub fn param(&self, id: ParamId) -> &Param<S> {
        &self.params[id.0]
    }

    pub(crate) fn accumulate_grad(&mut self, id: ParamId, g: &Tensor<S>) -> Result<()> {
        let p = self.params.get_mut(id.0).ok_or(Error::UnknownVar)?;
        if p.grad.shape() != g.shape() {
            return Err(Error::Shape {
                op: "accumulate_grad",
                lhs: p.grad.shape(),
                rhs: g.shape(),
            });
        }
        p.grad.add_assign(g);
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.grad.data_mut().iter_mut().for_each(|g| *g = S::zero());
        }
    }

    /// Scales every gradient buffer, e.g. to average over a batch.
    pub fn scale_grad(&mut self, k: S) {
        for p in &mut self.params {
            p.grad.data_mut().iter_mut().for_each(|g| *g = *g * k);
        }
    }

    /// Euclidean norm of all gradients taken together.
    pub fn grad_norm(&self) -> S {
        let mut sq = S::zero();
        for p in &self.params {
            for &g in p.grad.data() {
                sq = sq + g * g;
            }
        }
        sq.sqrt()
    }

    /// Rescales the gradients so their joint norm is at most `max_norm`.
    /// Returns the norm before clipping.
    pub fn clip_grad_norm(&mut self, max_norm: S) -> S {
        let norm = self.grad_norm();
        if norm > max_norm && norm.is_finite() {
            self.scale_grad(max_norm / norm);
        }
        norm
    }

    /// Sets every parameter value to zero.
    pub fn zero_values(&mut self) {
        for p in &mut self.params {
            p.value.data_mut().iter_mut().for_each(|v| *v = S::zero());
        }
    }

    /// One bias-corrected Adam step, then clears the gradients.
    pub fn adam_step(&mut self, lr: S) -> Result<()> {
        if !(lr > S::zero()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        self.steps += 1;
        let t = self.steps as i32;
        let b1 = S::of(self.adam.beta1);
        let b2 = S::of(self.adam.beta2);
        let eps = S::of(self.adam.eps);
        let c1 = S::one() - b1.powi(t);
        let c2 = S::one() - b2.powi(t);
        for p in &mut self.params {
            let grads = p.grad.data();
            let values = p.value.data_mut();
            for k in 0..values.len() {
                let g = grads[k];
                let m = b1 * p.first_moment[k] + (S::one() - b1) * g;
                let v = b2 * p.second_moment[k] + (S::one() - b2) * g * g;
                p.first_moment[k] = m;
                p.second_moment[k] = v;
                values[k] = values[k] - lr * (m / c1) / ((v / c2).sqrt() + eps);
            }
        }
        self.zero_grad();
        Ok(())
    }
}
