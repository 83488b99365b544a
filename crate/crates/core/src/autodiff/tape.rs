use std::sync::Arc;

use super::params::{ParamId, ParamStore};
use super::tensor::{matmul, matmul_nt, matmul_tn, transpose, Tensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const NORM_EPS: f64 = 1e-5;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Sampling events for [`Tape::categorical_log_prob`]: each event picks
/// `chosen` among `candidates`, and belongs to a group (one trajectory).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CategoricalEvents {
    chosen: Vec<usize>,
    offsets: Vec<usize>,
    candidates: Vec<usize>,
    group: Vec<usize>,
    groups: usize,
}

impl CategoricalEvents {
    pub fn new() -> Self {
        Self {
            offsets: vec![0],
            ..Self::default()
        }
    }

    /// Opens a new group and returns its index.
    pub fn begin_group(&mut self) -> usize {
        self.groups += 1;
        self.groups - 1
    }

    /// Appends an event to the most recently opened group.
    pub fn push(&mut self, chosen: usize, candidates: &[usize]) {
        assert!(self.groups > 0, "push before begin_group");
        debug_assert!(candidates.contains(&chosen));
        self.chosen.push(chosen);
        self.candidates.extend_from_slice(candidates);
        self.offsets.push(self.candidates.len());
        self.group.push(self.groups - 1);
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    fn candidates(&self, e: usize) -> &[usize] {
        &self.candidates[self.offsets[e]..self.offsets[e + 1]]
    }

    fn max_index(&self) -> Option<usize> {
        self.candidates.iter().copied().max()
    }

    /// Per-group log-likelihood under weights `w^power`.
    pub fn group_log_probs<S: Scalar>(&self, weights: &[S], power: S) -> Vec<S> {
        let mut out = vec![S::zero(); self.groups];
        for e in 0..self.len() {
            let z: S = self
                .candidates(e)
                .iter()
                .map(|&c| weights[c].powf(power))
                .sum();
            out[self.group[e]] =
                out[self.group[e]] + power * weights[self.chosen[e]].ln() - z.ln();
        }
        out
    }
}

#[derive(Clone, Debug)]
enum Op<S> {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    Transpose(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    AddRow(Var, Var),
    MulRow(Var, Var),
    Scale(Var, S),
    AddScalar(Var),
    Sigmoid(Var),
    Silu(Var),
    Log(Var),
    Exp(Var),
    NormRows { x: Var, inv_std: Vec<S> },
    SoftmaxRows(Var),
    GatherRows { x: Var, idx: Arc<[usize]> },
    SegmentSum { x: Var, seg: Arc<[usize]> },
    SegmentMean { x: Var, seg: Arc<[usize]>, counts: Vec<usize> },
    ConcatCols(Vec<Var>),
    SliceCols { x: Var, start: usize },
    Sum(Var),
    CategoricalLogProb { w: Var, events: Arc<CategoricalEvents>, coef: Vec<S>, power: S },
}

impl<S> Op<S> {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Param(_) => "param",
            Op::MatMul(..) => "matmul",
            Op::Transpose(_) => "transpose",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Div(..) => "div",
            Op::AddRow(..) => "add_row",
            Op::MulRow(..) => "mul_row",
            Op::Scale(..) => "scale",
            Op::AddScalar(_) => "add_scalar",
            Op::Sigmoid(_) => "sigmoid",
            Op::Silu(_) => "silu",
            Op::Log(_) => "log",
            Op::Exp(_) => "exp",
            Op::NormRows { .. } => "norm_rows",
            Op::SoftmaxRows(_) => "softmax_rows",
            Op::GatherRows { .. } => "gather_rows",
            Op::SegmentSum { .. } => "segment_sum",
            Op::SegmentMean { .. } => "segment_mean",
            Op::ConcatCols(_) => "concat_cols",
            Op::SliceCols { .. } => "slice_cols",
            Op::Sum(_) => "sum",
            Op::CategoricalLogProb { .. } => "categorical_log_prob",
        }
    }
}

struct Node<S> {
    value: Tensor<S>,
    op: Op<S>,
}

/// Per-node gradients from one backward pass.
pub struct Gradients<S> {
    grads: Vec<Option<Tensor<S>>>,
}

impl<S: Scalar> Gradients<S> {
    /// Gradient with respect to `v`; zero-shaped `None` when `v` did not
    /// influence the loss.
    pub fn get(&self, v: Var) -> Option<&Tensor<S>> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }
}

/// Reverse-mode tape. Operations append nodes in topological order.
#[derive(Default)]
pub struct Tape<S> {
    nodes: Vec<Node<S>>,
}

fn sigmoid<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

impl<S: Scalar> Tape<S> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<S> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> [usize; 2] {
        self.nodes[v.0].value.shape()
    }

    fn push(&mut self, value: Tensor<S>, op: Op<S>) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFinite { op: op.name() });
        }
        self.nodes.push(Node { value, op });
        Ok(Var(self.nodes.len() - 1))
    }

    fn check(&self, v: Var) -> Result<&Tensor<S>> {
        self.nodes.get(v.0).map(|n| &n.value).ok_or(Error::UnknownVar)
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (self.check(a)?.shape(), self.check(b)?.shape());
        if sa != sb {
            return Err(Error::Shape { op, lhs: sa, rhs: sb });
        }
        Ok(())
    }

    /// Records a value that backward treats as an input (gradient available
    /// through [`Gradients::get`], not stored anywhere).
    pub fn leaf(&mut self, t: Tensor<S>) -> Result<Var> {
        self.push(t, Op::Leaf)
    }

    pub fn constant(&mut self, t: Tensor<S>) -> Result<Var> {
        self.leaf(t)
    }

    /// Records a parameter; backward accumulates into its gradient buffer.
    pub fn param(&mut self, store: &ParamStore<S>, id: ParamId) -> Result<Var> {
        let value = store.value(id).clone();
        self.push(value, Op::Param(id))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.check(a)?, self.check(b)?);
        if ta.cols() != tb.rows() {
            return Err(Error::Shape {
                op: "matmul",
                lhs: ta.shape(),
                rhs: tb.shape(),
            });
        }
        let out = matmul(ta, tb);
        self.push(out, Op::MatMul(a, b))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let out = transpose(self.check(a)?);
        self.push(out, Op::Transpose(a))
    }

    fn zip_with(&mut self, a: Var, b: Var, op: Op<S>, f: impl Fn(S, S) -> S) -> Result<Var> {
        self.same_shape(op.name(), a, b)?;
        let (ta, tb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        let out = Tensor::new(ta.rows(), ta.cols(), data)?;
        self.push(out, op)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Sub(a, b), |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Mul(a, b), |x, y| x * y)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Div(a, b), |x, y| x / y)
    }

    fn row_broadcast(
        &mut self,
        a: Var,
        row: Var,
        op: Op<S>,
        f: impl Fn(S, S) -> S,
    ) -> Result<Var> {
        let (ta, tr) = (self.check(a)?, self.check(row)?);
        if tr.rows() != 1 || tr.cols() != ta.cols() {
            return Err(Error::Shape {
                op: op.name(),
                lhs: ta.shape(),
                rhs: tr.shape(),
            });
        }
        let cols = ta.cols();
        let data = ta
            .data()
            .iter()
            .enumerate()
            .map(|(k, &x)| f(x, tr.data()[k % cols]))
            .collect();
        let out = Tensor::new(ta.rows(), cols, data)?;
        self.push(out, op)
    }

    /// `a + bias` with `bias` a `1 x cols` row added to every row.
    pub fn add_row(&mut self, a: Var, bias: Var) -> Result<Var> {
        self.row_broadcast(a, bias, Op::AddRow(a, bias), |x, b| x + b)
    }

    /// `a ⊙ gain` with `gain` a `1 x cols` row.
    pub fn mul_row(&mut self, a: Var, gain: Var) -> Result<Var> {
        self.row_broadcast(a, gain, Op::MulRow(a, gain), |x, g| x * g)
    }

    pub fn scale(&mut self, a: Var, k: S) -> Result<Var> {
        let out = self.check(a)?.map(|x| x * k);
        self.push(out, Op::Scale(a, k))
    }

    pub fn add_scalar(&mut self, a: Var, k: S) -> Result<Var> {
        let out = self.check(a)?.map(|x| x + k);
        self.push(out, Op::AddScalar(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let out = self.check(a)?.map(sigmoid);
        self.push(out, Op::Sigmoid(a))
    }

    pub fn silu(&mut self, a: Var) -> Result<Var> {
        let out = self.check(a)?.map(|x| x * sigmoid(x));
        self.push(out, Op::Silu(a))
    }

    pub fn log(&mut self, a: Var) -> Result<Var> {
        let out = self.check(a)?.map(|x| x.ln());
        self.push(out, Op::Log(a))
    }

    pub fn exp(&mut self, a: Var) -> Result<Var> {
        let out = self.check(a)?.map(|x| x.exp());
        self.push(out, Op::Exp(a))
    }

    /// Feature-wise normalization of each row to zero mean and unit
    /// variance (no batch statistics, no affine part).
    pub fn norm_rows(&mut self, a: Var) -> Result<Var> {
        let t = self.check(a)?;
        let (rows, cols) = (t.rows(), t.cols());
        let n = S::of(cols as f64);
        let mut data = Vec::with_capacity(t.len());
        let mut inv_std = Vec::with_capacity(rows);
        for r in 0..rows {
            let row = t.row_slice(r);
            let mean = row.iter().copied().sum::<S>() / n;
            let var = row.iter().map(|&x| (x - mean) * (x - mean)).sum::<S>() / n;
            let is = S::one() / (var + S::of(NORM_EPS)).sqrt();
            inv_std.push(is);
            data.extend(row.iter().map(|&x| (x - mean) * is));
        }
        let out = Tensor::new(rows, cols, data)?;
        self.push(out, Op::NormRows { x: a, inv_std })
    }

    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let t = self.check(a)?;
        let (rows, cols) = (t.rows(), t.cols());
        let mut data = Vec::with_capacity(t.len());
        for r in 0..rows {
            let row = t.row_slice(r);
            let max = row.iter().copied().fold(S::neg_infinity(), S::max);
            let start = data.len();
            data.extend(row.iter().map(|&x| (x - max).exp()));
            let z: S = data[start..].iter().copied().sum();
            for v in &mut data[start..] {
                *v = *v / z;
            }
        }
        let out = Tensor::new(rows, cols, data)?;
        self.push(out, Op::SoftmaxRows(a))
    }

    /// Output row `r` is input row `idx[r]`.
    pub fn gather_rows(&mut self, a: Var, idx: Arc<[usize]>) -> Result<Var> {
        let t = self.check(a)?;
        let cols = t.cols();
        if let Some(&bad) = idx.iter().find(|&&i| i >= t.rows()) {
            return Err(Error::Shape {
                op: "gather_rows",
                lhs: t.shape(),
                rhs: [bad, cols],
            });
        }
        let mut data = Vec::with_capacity(idx.len() * cols);
        for &i in idx.iter() {
            data.extend_from_slice(t.row_slice(i));
        }
        let out = Tensor::new(idx.len(), cols, data)?;
        self.push(out, Op::GatherRows { x: a, idx })
    }

    fn segment_accumulate(&self, a: Var, seg: &[usize], n: usize) -> Result<(Tensor<S>, Vec<usize>)> {
        let t = self.check(a)?;
        if seg.len() != t.rows() || seg.iter().any(|&s| s >= n) {
            return Err(Error::Shape {
                op: "segment",
                lhs: t.shape(),
                rhs: [seg.len(), n],
            });
        }
        let cols = t.cols();
        let mut out = Tensor::zeros(n, cols);
        let mut counts = vec![0usize; n];
        for (r, &s) in seg.iter().enumerate() {
            counts[s] += 1;
            let src = t.row_slice(r);
            let dst = &mut out.data_mut()[s * cols..(s + 1) * cols];
            for (d, &v) in dst.iter_mut().zip(src) {
                *d = *d + v;
            }
        }
        Ok((out, counts))
    }

    /// Row `s` of the output sums the input rows `r` with `seg[r] == s`.
    pub fn segment_sum(&mut self, a: Var, seg: Arc<[usize]>, n: usize) -> Result<Var> {
        let (out, _) = self.segment_accumulate(a, &seg, n)?;
        self.push(out, Op::SegmentSum { x: a, seg })
    }

    /// Mean over each segment; empty segments produce a zero row.
    pub fn segment_mean(&mut self, a: Var, seg: Arc<[usize]>, n: usize) -> Result<Var> {
        let (mut out, counts) = self.segment_accumulate(a, &seg, n)?;
        let cols = out.cols();
        for (s, &c) in counts.iter().enumerate() {
            if c > 0 {
                let inv = S::one() / S::of(c as f64);
                for v in &mut out.data_mut()[s * cols..(s + 1) * cols] {
                    *v = *v * inv;
                }
            }
        }
        self.push(out, Op::SegmentMean { x: a, seg, counts })
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("concat_cols of nothing".into()))?;
        let rows = self.check(first)?.rows();
        let mut total = 0;
        for &p in parts {
            let t = self.check(p)?;
            if t.rows() != rows {
                return Err(Error::Shape {
                    op: "concat_cols",
                    lhs: self.shape(first),
                    rhs: t.shape(),
                });
            }
            total += t.cols();
        }
        let mut data = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.nodes[p.0].value.row_slice(r));
            }
        }
        let out = Tensor::new(rows, total, data)?;
        self.push(out, Op::ConcatCols(parts.to_vec()))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let t = self.check(a)?;
        if start + len > t.cols() {
            return Err(Error::Shape {
                op: "slice_cols",
                lhs: t.shape(),
                rhs: [start, len],
            });
        }
        let mut data = Vec::with_capacity(t.rows() * len);
        for r in 0..t.rows() {
            data.extend_from_slice(&t.row_slice(r)[start..start + len]);
        }
        let out = Tensor::new(t.rows(), len, data)?;
        self.push(out, Op::SliceCols { x: a, start })
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s: S = self.check(a)?.data().iter().copied().sum();
        self.push(Tensor::scalar(s), Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let n = self.check(a)?.len().max(1);
        let s = self.sum(a)?;
        self.scale(s, S::one() / S::of(n as f64))
    }

    /// `Σ_e coef[group(e)] · log( w[chosen_e]^p / Σ_{c ∈ cand_e} w[c]^p )`
    /// over a column of positive weights.
    pub fn categorical_log_prob(
        &mut self,
        w: Var,
        events: Arc<CategoricalEvents>,
        coef: Vec<S>,
        power: S,
    ) -> Result<Var> {
        let t = self.check(w)?;
        if t.cols() != 1 || events.max_index().is_some_and(|m| m >= t.rows()) {
            return Err(Error::Shape {
                op: "categorical_log_prob",
                lhs: t.shape(),
                rhs: [events.max_index().unwrap_or(0) + 1, 1],
            });
        }
        if coef.len() != events.groups() {
            return Err(Error::InvalidArgument(format!(
                "categorical_log_prob: {} coefficients for {} groups",
                coef.len(),
                events.groups()
            )));
        }
        if t.data().iter().any(|&x| x <= S::zero()) {
            return Err(Error::InvalidArgument(
                "categorical_log_prob: weights must be positive".into(),
            ));
        }
        let lp = events.group_log_probs(t.data(), power);
        let total: S = lp.iter().zip(&coef).map(|(&l, &c)| l * c).sum();
        self.push(
            Tensor::scalar(total),
            Op::CategoricalLogProb {
                w,
                events,
                coef,
                power,
            },
        )
    }

    /// Runs backward from a scalar loss and accumulates parameter gradients
    /// into `store`.
    pub fn backward(&self, loss: Var, store: &mut ParamStore<S>) -> Result<Gradients<S>> {
        let grads = self.gradients(loss)?;
        for (node, g) in self.nodes.iter().zip(&grads.grads) {
            if let (Op::Param(id), Some(g)) = (&node.op, g) {
                store.accumulate_grad(*id, g)?;
            }
        }
        Ok(grads)
    }

    /// Gradients of a scalar loss with respect to every recorded node.
    pub fn gradients(&self, loss: Var) -> Result<Gradients<S>> {
        let lt = self.check(loss)?;
        if lt.len() != 1 {
            return Err(Error::NonScalarLoss { shape: lt.shape() });
        }
        let mut grads: Vec<Option<Tensor<S>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::scalar(S::one()));
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            let contribs = self.local_grads(node, &g);
            for (input, dg) in contribs {
                if !dg.is_finite() {
                    return Err(Error::NonFiniteGrad { op: node.op.name() });
                }
                match &mut grads[input.0] {
                    Some(acc) => acc.add_assign(&dg),
                    slot @ None => *slot = Some(dg),
                }
            }
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn val(&self, v: Var) -> &Tensor<S> {
        &self.nodes[v.0].value
    }

    fn local_grads(&self, node: &Node<S>, g: &Tensor<S>) -> Vec<(Var, Tensor<S>)> {
        let y = &node.value;
        let (rows, cols) = (y.rows(), y.cols());
        let elementwise = |f: &dyn Fn(usize) -> S| {
            Tensor::new(rows, cols, (0..rows * cols).map(f).collect()).expect("shape")
        };
        match &node.op {
            Op::Leaf | Op::Param(_) => vec![],
            Op::MatMul(a, b) => {
                let ga = matmul_nt(g, self.val(*b));
                let gb = matmul_tn(self.val(*a), g);
                vec![(*a, ga), (*b, gb)]
            }
            Op::Transpose(a) => vec![(*a, transpose(g))],
            Op::Add(a, b) => vec![(*a, g.clone()), (*b, g.clone())],
            Op::Sub(a, b) => vec![(*a, g.clone()), (*b, g.map(|x| -x))],
            Op::Mul(a, b) => {
                let (ta, tb) = (self.val(*a), self.val(*b));
                let ga = elementwise(&|k| g.data()[k] * tb.data()[k]);
                let gb = elementwise(&|k| g.data()[k] * ta.data()[k]);
                vec![(*a, ga), (*b, gb)]
            }
            Op::Div(a, b) => {
                let (ta, tb) = (self.val(*a), self.val(*b));
                let ga = elementwise(&|k| g.data()[k] / tb.data()[k]);
                let gb = elementwise(&|k| {
                    let d = tb.data()[k];
                    -g.data()[k] * ta.data()[k] / (d * d)
                });
                vec![(*a, ga), (*b, gb)]
            }
            Op::AddRow(a, bias) => {
                let mut gb = Tensor::zeros(1, cols);
                for r in 0..rows {
                    for c in 0..cols {
                        gb.data_mut()[c] = gb.data()[c] + g.data()[r * cols + c];
                    }
                }
                vec![(*a, g.clone()), (*bias, gb)]
            }
            Op::MulRow(a, gain) => {
                let (ta, tg) = (self.val(*a), self.val(*gain));
                let ga = elementwise(&|k| g.data()[k] * tg.data()[k % cols]);
                let mut gg = Tensor::zeros(1, cols);
                for k in 0..rows * cols {
                    let c = k % cols;
                    gg.data_mut()[c] = gg.data()[c] + g.data()[k] * ta.data()[k];
                }
                vec![(*a, ga), (*gain, gg)]
            }
            Op::Scale(a, k) => vec![(*a, g.map(|x| x * *k))],
            Op::AddScalar(a) => vec![(*a, g.clone())],
            Op::Sigmoid(a) => {
                let ga = elementwise(&|k| {
                    let s = y.data()[k];
                    g.data()[k] * s * (S::one() - s)
                });
                vec![(*a, ga)]
            }
            Op::Silu(a) => {
                let x = self.val(*a);
                let ga = elementwise(&|k| {
                    let xv = x.data()[k];
                    let s = sigmoid(xv);
                    g.data()[k] * (s + xv * s * (S::one() - s))
                });
                vec![(*a, ga)]
            }
            Op::Log(a) => {
                let x = self.val(*a);
                vec![(*a, elementwise(&|k| g.data()[k] / x.data()[k]))]
            }
            Op::Exp(a) => vec![(*a, elementwise(&|k| g.data()[k] * y.data()[k]))],
            Op::NormRows { x, inv_std } => {
                let n = S::of(cols as f64);
                let mut gx = Tensor::zeros(rows, cols);
                for r in 0..rows {
                    let yr = y.row_slice(r);
                    let gr = g.row_slice(r);
                    let mean_g = gr.iter().copied().sum::<S>() / n;
                    let mean_gy = gr.iter().zip(yr).map(|(&a, &b)| a * b).sum::<S>() / n;
                    for c in 0..cols {
                        gx.data_mut()[r * cols + c] =
                            inv_std[r] * (gr[c] - mean_g - yr[c] * mean_gy);
                    }
                }
                vec![(*x, gx)]
            }
            Op::SoftmaxRows(a) => {
                let mut ga = Tensor::zeros(rows, cols);
                for r in 0..rows {
                    let yr = y.row_slice(r);
                    let gr = g.row_slice(r);
                    let dot: S = yr.iter().zip(gr).map(|(&p, &q)| p * q).sum();
                    for c in 0..cols {
                        ga.data_mut()[r * cols + c] = yr[c] * (gr[c] - dot);
                    }
                }
                vec![(*a, ga)]
            }
            Op::GatherRows { x, idx } => {
                let src = self.val(*x);
                let mut gx = Tensor::zeros(src.rows(), cols);
                for (r, &i) in idx.iter().enumerate() {
                    let dst = &mut gx.data_mut()[i * cols..(i + 1) * cols];
                    for (d, &v) in dst.iter_mut().zip(g.row_slice(r)) {
                        *d = *d + v;
                    }
                }
                vec![(*x, gx)]
            }
            Op::SegmentSum { x, seg } => {
                let mut gx = Tensor::zeros(seg.len(), cols);
                for (r, &s) in seg.iter().enumerate() {
                    gx.data_mut()[r * cols..(r + 1) * cols].copy_from_slice(g.row_slice(s));
                }
                vec![(*x, gx)]
            }
            Op::SegmentMean { x, seg, counts } => {
                let mut gx = Tensor::zeros(seg.len(), cols);
                for (r, &s) in seg.iter().enumerate() {
                    let inv = S::one() / S::of(counts[s] as f64);
                    for (d, &v) in gx.data_mut()[r * cols..(r + 1) * cols]
                        .iter_mut()
                        .zip(g.row_slice(s))
                    {
                        *d = v * inv;
                    }
                }
                vec![(*x, gx)]
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                let mut out = Vec::with_capacity(parts.len());
                for &p in parts {
                    let pc = self.val(p).cols();
                    let mut gp = Vec::with_capacity(rows * pc);
                    for r in 0..rows {
                        gp.extend_from_slice(&g.row_slice(r)[offset..offset + pc]);
                    }
                    out.push((p, Tensor::new(rows, pc, gp).expect("shape")));
                    offset += pc;
                }
                out
            }
            Op::SliceCols { x, start } => {
                let src = self.val(*x);
                let mut gx = Tensor::zeros(src.rows(), src.cols());
                for r in 0..rows {
                    let base = r * src.cols() + start;
                    gx.data_mut()[base..base + cols].copy_from_slice(g.row_slice(r));
                }
                vec![(*x, gx)]
            }
            Op::Sum(a) => {
                let src = self.val(*a);
                vec![(*a, Tensor::filled(src.rows(), src.cols(), g.data()[0]))]
            }
            Op::CategoricalLogProb {
                w,
                events,
                coef,
                power,
            } => {
                let wt = self.val(*w);
                let wd = wt.data();
                let upstream = g.data()[0];
                let mut gw = Tensor::zeros(wt.rows(), 1);
                for e in 0..events.len() {
                    let k = upstream * coef[events.group[e]];
                    if k == S::zero() {
                        continue;
                    }
                    let cands = events.candidates(e);
                    let z: S = cands.iter().map(|&c| wd[c].powf(*power)).sum();
                    let chosen = events.chosen[e];
                    let gd = gw.data_mut();
                    gd[chosen] = gd[chosen] + k * *power / wd[chosen];
                    for &c in cands {
                        let p = wd[c].powf(*power) / z;
                        gd[c] = gd[c] - k * *power * p / wd[c];
                    }
                }
                vec![(*w, gw)]
            }
        }
    }
}
