use std::sync::Arc;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::problem::{ConstructionGraph, Instance, ProblemData};
use crate::scalar::Scalar;

/// Network input for the successor model: problem-native node features,
/// one attribute per construction-graph edge, and the edge endpoints.
#[derive(Clone, Debug)]
pub struct GraphInput<S> {
    pub nodes: usize,
    pub node_features: Tensor<S>,
    pub edge_features: Tensor<S>,
    pub sources: Arc<[usize]>,
    pub targets: Arc<[usize]>,
}

/// Width of the per-node feature vector for `instance`.
pub fn node_feature_width(instance: &Instance) -> usize {
    match &instance.data {
        ProblemData::Tsp(_) | ProblemData::Op(_) | ProblemData::Pctsp(_) | ProblemData::Smtwtp(_) => 2,
        ProblemData::Mkp(p) => p.constraints(),
    }
}

/// Width of the per-item feature vector (item model, knapsack only).
pub fn item_feature_width(instance: &Instance) -> Result<usize> {
    instance.as_mkp().map(|p| p.constraints() + 1).ok_or(Error::Unsupported {
        kind: instance.kind(),
        what: "item features",
    })
}

fn node_rows(instance: &Instance) -> Vec<Vec<f64>> {
    match &instance.data {
        ProblemData::Tsp(p) => p.geometry.coords().iter().map(|c| c.to_vec()).collect(),
        ProblemData::Op(p) => (0..p.geometry.len())
            .map(|i| vec![p.prizes[i], p.geometry.dist(0, i)])
            .collect(),
        ProblemData::Pctsp(p) => (0..p.geometry.len())
            .map(|i| vec![p.prizes[i], p.penalties[i]])
            .collect(),
        ProblemData::Smtwtp(p) => {
            let n = p.due.len() as f64;
            std::iter::once(vec![0.0, 0.0])
                .chain((0..p.due.len()).map(|j| vec![p.due[j] / n, p.weight[j]]))
                .collect()
        }
        ProblemData::Mkp(p) => std::iter::once(vec![0.0; p.constraints()])
            .chain((0..p.values.len()).map(|j| p.weights.iter().map(|row| row[j]).collect()))
            .collect(),
    }
}

fn to_tensor<S: Scalar>(rows: &[Vec<f64>], cols: usize) -> Result<Tensor<S>> {
    let data = rows.iter().flat_map(|r| r.iter().map(|&v| S::of(v))).collect();
    Tensor::new(rows.len(), cols, data)
}

impl<S: Scalar> GraphInput<S> {
    pub fn new(instance: &Instance, graph: &ConstructionGraph) -> Result<Self> {
        let rows = node_rows(instance);
        if rows.len() != graph.node_count() {
            return Err(Error::InvalidArgument(format!(
                "graph has {} nodes, instance {}",
                graph.node_count(),
                rows.len()
            )));
        }
        let width = node_feature_width(instance);
        let edges: Vec<S> = graph.attrs().iter().map(|&a| S::of(a)).collect();
        Ok(Self {
            nodes: rows.len(),
            node_features: to_tensor(&rows, width)?,
            edge_features: Tensor::new(edges.len(), 1, edges)?,
            sources: graph.sources(),
            targets: graph.targets(),
        })
    }

    pub fn edge_count(&self) -> usize {
        self.sources.len()
    }
}

/// Item features `(v_j, w_1j/c_1, …, w_mj/c_m)`, one row per item.
pub fn item_features<S: Scalar>(instance: &Instance) -> Result<Tensor<S>> {
    let width = item_feature_width(instance)?;
    let p = instance.as_mkp().expect("checked above");
    let rows: Vec<Vec<f64>> = (0..p.values.len())
        .map(|j| {
            std::iter::once(p.values[j])
                .chain(p.weights.iter().zip(&p.capacities).map(|(row, &c)| row[j] / c))
                .collect()
        })
        .collect();
    to_tensor(&rows, width)
}
