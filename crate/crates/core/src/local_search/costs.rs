use crate::error::{Error, Result};
use crate::problem::{ConstructionGraph, Geometry, HeuristicField, PheromoneModel, EPS_ETA};

/// Symmetric pairwise costs minimized by 2-opt, with per-node candidate
/// lists sorted by increasing cost.
#[derive(Clone, Debug, PartialEq)]
pub struct CostField {
    n: usize,
    cost: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl CostField {
    /// Full candidate lists: every other node is a neighbor.
    pub fn new(n: usize, cost: Vec<f64>) -> Result<Self> {
        let lists = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        Self::with_neighbors(n, cost, lists)
    }

    pub fn with_neighbors(n: usize, cost: Vec<f64>, mut neighbors: Vec<Vec<usize>>) -> Result<Self> {
        if cost.len() != n * n || neighbors.len() != n {
            return Err(Error::InvalidArgument(format!(
                "cost field for {n} nodes has {} costs and {} lists",
                cost.len(),
                neighbors.len()
            )));
        }
        if let Some(c) = cost.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidArgument(format!("cost {c} is not finite and nonnegative")));
        }
        for (i, list) in neighbors.iter_mut().enumerate() {
            list.retain(|&j| j != i && j < n);
            list.sort_by(|&a, &b| cost[i * n + a].total_cmp(&cost[i * n + b]).then(a.cmp(&b)));
            list.dedup();
        }
        Ok(Self { n, cost, neighbors })
    }

    /// Euclidean distances with full candidate lists.
    pub fn distances(geometry: &Geometry) -> Self {
        Self::new(geometry.len(), geometry.matrix().to_vec()).expect("distances are finite")
    }

    /// Euclidean distances with candidate lists taken from the sparsified
    /// graph, closed under symmetry.
    pub fn sparse_distances(geometry: &Geometry, graph: &ConstructionGraph) -> Self {
        Self::with_neighbors(geometry.len(), geometry.matrix().to_vec(), graph.symmetric_closure())
            .expect("distances are finite")
    }

    /// Perturbation surrogate `1/η`, averaged over both directions so that
    /// 2-opt segment reversal leaves it unchanged. Pairs outside the graph
    /// cost `1/EPS_ETA`.
    pub fn inverse_heuristic(graph: &ConstructionGraph, eta: &HeuristicField) -> Result<Self> {
        if eta.model() != PheromoneModel::Successor || eta.len() != graph.edge_count() {
            return Err(Error::InvalidArgument(
                "perturbation costs need a successor-model field matching the graph".into(),
            ));
        }
        let n = graph.node_count();
        let mut inv = vec![1.0 / EPS_ETA; n * n];
        for e in 0..graph.edge_count() {
            inv[graph.source(e) * n + graph.target(e)] = 1.0 / (eta.values()[e] + EPS_ETA);
        }
        let mut cost = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    cost[i * n + j] = 0.5 * (inv[i * n + j] + inv[j * n + i]);
                }
            }
        }
        Self::with_neighbors(n, cost, graph.symmetric_closure())
    }

    /// Costs among `nodes` only, re-indexed `0..nodes.len()`, with full
    /// candidate lists.
    pub fn restrict(&self, nodes: &[usize]) -> Self {
        let m = nodes.len();
        let mut cost = vec![0.0; m * m];
        for (a, &i) in nodes.iter().enumerate() {
            for (b, &j) in nodes.iter().enumerate() {
                cost[a * m + b] = self.cost(i, j);
            }
        }
        Self::new(m, cost).expect("restricted costs stay valid")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Cost of the closed tour.
    pub fn tour_cost(&self, tour: &[usize]) -> f64 {
        let n = tour.len();
        if n < 2 {
            return 0.0;
        }
        (0..n).map(|k| self.cost(tour[k], tour[(k + 1) % n])).sum()
    }
}
