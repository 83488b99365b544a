use std::sync::Arc;

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::problem::{ConstructionGraph, EPS_ETA};
use crate::scalar::Scalar;

/// Partition of a field's entries into rows: entry `e` belongs to row
/// `segments[e]`. Successor fields are grouped by source node, item fields
/// form a single row.
#[derive(Clone, Debug, PartialEq)]
pub struct Rows {
    segments: Arc<[usize]>,
    count: usize,
}

impl Rows {
    pub fn new(segments: Vec<usize>, count: usize) -> Result<Self> {
        if segments.iter().any(|&s| s >= count) {
            return Err(Error::InvalidArgument("row index out of range".into()));
        }
        Ok(Self {
            segments: segments.into(),
            count,
        })
    }

    /// Rows of a successor field: one per source node.
    pub fn of_graph(graph: &ConstructionGraph) -> Self {
        Self {
            segments: graph.sources(),
            count: graph.node_count(),
        }
    }

    /// A single row of `len` entries.
    pub fn single(len: usize) -> Self {
        Self {
            segments: vec![0; len].into(),
            count: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Rows holding at least one entry.
    pub fn nonempty(&self) -> usize {
        let mut seen = vec![false; self.count];
        for &s in self.segments.iter() {
            seen[s] = true;
        }
        seen.into_iter().filter(|&b| b).count()
    }

    fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (e, &s) in self.segments.iter().enumerate() {
            out[s].push(e);
        }
        out
    }
}

fn check_column<S: Scalar>(tape: &Tape<S>, v: Var, rows: &Rows, op: &'static str) -> Result<()> {
    let shape = tape.shape(v);
    if shape != [rows.len(), 1] {
        return Err(Error::Shape {
            op,
            lhs: shape,
            rhs: [rows.len(), 1],
        });
    }
    Ok(())
}

/// Floors at `EPS_ETA` (additively) and normalizes every row to sum 1.
fn normalize<S: Scalar>(tape: &mut Tape<S>, v: Var, segments: &Arc<[usize]>, count: usize) -> Result<Var> {
    let floored = tape.add_scalar(v, S::of(EPS_ETA))?;
    let sums = tape.segment_sum(floored, segments.clone(), count)?;
    let spread = tape.gather_rows(sums, segments.clone())?;
    tape.div(floored, spread)
}

/// `−1/(m² n) Σ_k Σ_l Σ_i Σ_j η̃^k_ij log(η̃^k_ij / η̃^l_ij)` over the
/// row-normalized head fields; zero for identical heads.
pub fn loss_kl<S: Scalar>(tape: &mut Tape<S>, heads: &[Var], rows: &Rows) -> Result<Var> {
    if heads.len() < 2 {
        return Err(Error::InvalidArgument("KL diversity needs at least two heads".into()));
    }
    let mut normed = Vec::with_capacity(heads.len());
    let mut logs = Vec::with_capacity(heads.len());
    for &h in heads {
        check_column(tape, h, rows, "loss_kl")?;
        let p = normalize(tape, h, &rows.segments, rows.count)?;
        logs.push(tape.log(p)?);
        normed.push(p);
    }
    let m = heads.len();
    let mut terms = Vec::new();
    for k in 0..m {
        for l in 0..m {
            if k == l {
                continue;
            }
            let diff = tape.sub(logs[k], logs[l])?;
            let prod = tape.mul(normed[k], diff)?;
            terms.push(tape.sum(prod)?);
        }
    }
    let mut total = terms[0];
    for &t in &terms[1..] {
        total = tape.add(total, t)?;
    }
    let n = rows.nonempty().max(1);
    tape.scale(total, -S::one() / S::of((m * m * n) as f64))
}

/// `(1/n) Σ_i Σ_{j ∈ K_i} η̄_ij log η̄_ij`, with `K_i` the `k` largest
/// entries of row `i` (the whole row when shorter) and `η̄` normalized
/// within `K_i`.
pub fn loss_topk_entropy<S: Scalar>(tape: &mut Tape<S>, field: Var, rows: &Rows, k: usize) -> Result<Var> {
    if k == 0 {
        return Err(Error::InvalidArgument("top-k entropy needs k >= 1".into()));
    }
    check_column(tape, field, rows, "loss_topk_entropy")?;
    let values = tape.value(field).clone();
    let mut idx = Vec::new();
    let mut seg = Vec::new();
    let mut n = 0;
    for members in rows.members() {
        if members.is_empty() {
            continue;
        }
        let mut order = members;
        order.sort_by(|&a, &b| values.data()[b].as_f64().total_cmp(&values.data()[a].as_f64()).then(a.cmp(&b)));
        order.truncate(k);
        seg.extend(std::iter::repeat_n(n, order.len()));
        idx.extend(order);
        n += 1;
    }
    let top = tape.gather_rows(field, idx.into())?;
    let seg: Arc<[usize]> = seg.into();
    let p = normalize(tape, top, &seg, n)?;
    let lp = tape.log(p)?;
    let plp = tape.mul(p, lp)?;
    let total = tape.sum(plp)?;
    tape.scale(total, S::one() / S::of(n.max(1) as f64))
}

/// `(1/n) Σ_i Σ_j η̃*_ij log(η̃*_ij / η̃_ij)` between the row-normalized
/// expert (constant) and learned fields.
pub fn loss_imitation<S: Scalar>(tape: &mut Tape<S>, field: Var, expert: &[f64], rows: &Rows) -> Result<Var> {
    check_column(tape, field, rows, "loss_imitation")?;
    if expert.len() != rows.len() {
        return Err(Error::Shape {
            op: "loss_imitation",
            lhs: [expert.len(), 1],
            rhs: [rows.len(), 1],
        });
    }
    let target = tape.constant(Tensor::column(expert.iter().map(|&v| S::of(v.max(0.0))).collect()))?;
    let q = normalize(tape, target, &rows.segments, rows.count)?;
    let p = normalize(tape, field, &rows.segments, rows.count)?;
    let lq = tape.log(q)?;
    let lp = tape.log(p)?;
    let diff = tape.sub(lq, lp)?;
    let prod = tape.mul(q, diff)?;
    let total = tape.sum(prod)?;
    tape.scale(total, S::one() / S::of(rows.nonempty().max(1) as f64))
}
