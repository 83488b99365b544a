use std::ops::Range;
use std::sync::Arc;

use super::instance::{Instance, ProblemData};
use super::ProblemKind;

const NO_EDGE: u32 = u32::MAX;

/// Neighbor count kept per node by [`ConstructionGraph::sparsify`].
pub fn default_sparsity(kind: ProblemKind, n: usize) -> usize {
    match kind {
        ProblemKind::Op if n <= 100 => 20,
        ProblemKind::Op => 50,
        _ if n <= 20 => 10,
        _ if n <= 100 => 20,
        _ => 50,
    }
}

/// Directed construction graph in CSR form. Edge `e` goes from `src[e]` to
/// `dst[e]`; the edges leaving node `i` are `offsets[i]..offsets[i + 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionGraph {
    nodes: usize,
    offsets: Vec<usize>,
    src: Arc<[usize]>,
    dst: Arc<[usize]>,
    attrs: Vec<f64>,
    lookup: Vec<u32>,
}

impl ConstructionGraph {
    fn from_adjacency(adjacency: Vec<Vec<usize>>, attr: impl Fn(usize, usize) -> f64) -> Self {
        let nodes = adjacency.len();
        let mut offsets = Vec::with_capacity(nodes + 1);
        let mut src = Vec::new();
        let mut dst = Vec::new();
        let mut attrs = Vec::new();
        let mut lookup = vec![NO_EDGE; nodes * nodes];
        offsets.push(0);
        for (i, targets) in adjacency.into_iter().enumerate() {
            for j in targets {
                lookup[i * nodes + j] = src.len() as u32;
                src.push(i);
                dst.push(j);
                attrs.push(attr(i, j));
            }
            offsets.push(src.len());
        }
        Self {
            nodes,
            offsets,
            src: src.into(),
            dst: dst.into(),
            attrs,
            lookup,
        }
    }

    /// Sparsified graph with the default neighbor count for the instance.
    pub fn sparsify(instance: &Instance) -> Self {
        Self::sparsify_with(instance, default_sparsity(instance.kind(), instance.size()))
    }

    /// Routing problems keep each node's `k` nearest neighbors (the depot
    /// always among them); scheduling and knapsack graphs are complete
    /// over a dummy start node 0 plus one node per job/item.
    pub fn sparsify_with(instance: &Instance, k: usize) -> Self {
        match &instance.data {
            ProblemData::Tsp(p) => Self::knn(&p.geometry, k, None),
            ProblemData::Op(p) => Self::knn(&p.geometry, k, Some(0)),
            ProblemData::Pctsp(p) => Self::knn(&p.geometry, k, Some(0)),
            ProblemData::Smtwtp(p) => {
                Self::complete_with_start(p.due.len() + 1, |_, j| p.processing[j - 1])
            }
            ProblemData::Mkp(p) => Self::complete_with_start(p.values.len() + 1, |i, _| {
                if i == 0 {
                    0.0
                } else {
                    p.values[i - 1]
                }
            }),
        }
    }

    fn knn(geometry: &super::Geometry, k: usize, depot: Option<usize>) -> Self {
        let n = geometry.len();
        let mut adjacency = Vec::with_capacity(n);
        for i in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| geometry.dist(i, a).total_cmp(&geometry.dist(i, b)).then(a.cmp(&b)));
            others.truncate(k.min(n - 1));
            if let Some(d) = depot {
                if i != d && !others.contains(&d) && !others.is_empty() {
                    *others.last_mut().expect("non-empty") = d;
                }
            }
            adjacency.push(others);
        }
        Self::from_adjacency(adjacency, |i, j| geometry.dist(i, j))
    }

    fn complete_with_start(nodes: usize, attr: impl Fn(usize, usize) -> f64) -> Self {
        let adjacency = (0..nodes)
            .map(|i| (1..nodes).filter(|&j| j != i).collect())
            .collect();
        Self::from_adjacency(adjacency, attr)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.src.len()
    }

    pub fn edges_from(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.dst[self.edges_from(i)]
    }

    #[inline]
    pub fn source(&self, e: usize) -> usize {
        self.src[e]
    }

    #[inline]
    pub fn target(&self, e: usize) -> usize {
        self.dst[e]
    }

    pub fn sources(&self) -> Arc<[usize]> {
        Arc::clone(&self.src)
    }

    pub fn targets(&self) -> Arc<[usize]> {
        Arc::clone(&self.dst)
    }

    /// Edge attribute (distance, processing time or item value).
    pub fn attr(&self, e: usize) -> f64 {
        self.attrs[e]
    }

    pub fn attrs(&self) -> &[f64] {
        &self.attrs
    }

    #[inline]
    pub fn edge(&self, i: usize, j: usize) -> Option<usize> {
        match self.lookup[i * self.nodes + j] {
            NO_EDGE => None,
            e => Some(e as usize),
        }
    }

    /// Neighbor lists closed under symmetry: `j` is listed for `i` when
    /// either `i -> j` or `j -> i` is an edge.
    pub fn symmetric_closure(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = (0..self.nodes).map(|i| self.neighbors(i).to_vec()).collect();
        for e in 0..self.edge_count() {
            let (i, j) = (self.src[e], self.dst[e]);
            if self.edge(j, i).is_none() && !adj[j].contains(&i) {
                adj[j].push(i);
            }
        }
        adj
    }
}
