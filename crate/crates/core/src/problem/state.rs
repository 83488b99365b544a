use super::graph::ConstructionGraph;
use super::instance::{Instance, ProblemData};
use super::{PheromoneModel, ProblemKind, Solution};
use crate::error::{Error, Result};

/// A selectable next step. `target` is a graph node (successor model) or an
/// item index (item model); `field` indexes the heuristic/pheromone field
/// and is `None` for steps outside the sparsified graph (fallbacks and the
/// forced empty-tour terminator).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Component {
    pub target: usize,
    pub field: Option<usize>,
}

/// Partial solution of one ant with incrementally maintained accumulators.
#[derive(Clone, Debug)]
pub struct ConstructionState<'a> {
    instance: &'a Instance,
    graph: &'a ConstructionGraph,
    model: PheromoneModel,
    route: Vec<usize>,
    visited: Vec<bool>,
    current: usize,
    length: f64,
    prize: f64,
    elapsed: f64,
    residual: Vec<f64>,
    /// Items not yet selected that still fit (knapsack only).
    open: Vec<usize>,
    finished: bool,
}

impl<'a> ConstructionState<'a> {
    /// Starts at `start` for TSP; routing problems with a depot, scheduling
    /// and knapsack start at node 0 and ignore `start`.
    pub fn new(
        instance: &'a Instance,
        graph: &'a ConstructionGraph,
        model: PheromoneModel,
        start: usize,
    ) -> Result<Self> {
        let kind = instance.kind();
        if !kind.supports(model) {
            return Err(Error::Unsupported {
                kind,
                what: "the item pheromone model",
            });
        }
        let slots = match model {
            PheromoneModel::Successor => instance.graph_nodes(),
            PheromoneModel::Items => instance.size(),
        };
        if model == PheromoneModel::Successor && graph.node_count() != slots {
            return Err(Error::InvalidArgument(format!(
                "graph has {} nodes, instance needs {slots}",
                graph.node_count()
            )));
        }
        let mut state = Self {
            instance,
            graph,
            model,
            route: Vec::with_capacity(slots),
            visited: vec![false; slots],
            current: 0,
            length: 0.0,
            prize: 0.0,
            elapsed: 0.0,
            residual: Vec::new(),
            open: Vec::new(),
            finished: false,
        };
        if let ProblemData::Mkp(p) = &instance.data {
            state.residual = p.capacities.clone();
            state.open = (0..p.values.len()).collect();
            state.refresh_open();
        }
        if model == PheromoneModel::Successor {
            let first = if kind == ProblemKind::Tsp { start } else { 0 };
            if first >= slots {
                return Err(Error::InvalidArgument(format!("start node {first} out of range")));
            }
            state.current = first;
            state.visited[first] = true;
            state.route.push(first);
        }
        Ok(state)
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn model(&self) -> PheromoneModel {
        self.model
    }

    /// Nodes or items chosen so far, including the start node.
    pub fn partial(&self) -> &[usize] {
        &self.route
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn is_visited(&self, slot: usize) -> bool {
        self.visited[slot]
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn prize(&self) -> f64 {
        self.prize
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn is_finished(&self) -> bool {
        self.finished || self.is_full()
    }

    fn is_full(&self) -> bool {
        match self.instance.kind() {
            ProblemKind::Tsp | ProblemKind::Smtwtp => self.route.len() == self.visited.len(),
            _ => false,
        }
    }

    fn refresh_open(&mut self) {
        if let ProblemData::Mkp(p) = &self.instance.data {
            let residual = &self.residual;
            let visited = &self.visited;
            let offset = usize::from(self.model == PheromoneModel::Successor);
            self.open.retain(|&j| {
                !visited[j + offset] && p.weights.iter().zip(residual).all(|(row, &r)| row[j] <= r)
            });
        }
    }

    fn edge_component(&self, j: usize) -> Option<Component> {
        self.graph.edge(self.current, j).map(|e| Component {
            target: j,
            field: Some(e),
        })
    }

    /// Writes the feasible next components into `out` (cleared first). An
    /// empty result on an unfinished state means the construction stops
    /// (orienteering, knapsack) or has hit a dead end.
    pub fn feasible(&self, out: &mut Vec<Component>) {
        out.clear();
        if self.is_finished() {
            return;
        }
        let cur = self.current;
        match (&self.instance.data, self.model) {
            (ProblemData::Tsp(_), _) => {
                for e in self.graph.edges_from(cur) {
                    let j = self.graph.target(e);
                    if !self.visited[j] {
                        out.push(Component { target: j, field: Some(e) });
                    }
                }
                if out.is_empty() {
                    out.extend(
                        (0..self.visited.len())
                            .filter(|&j| !self.visited[j])
                            .map(|j| Component { target: j, field: None }),
                    );
                }
            }
            (ProblemData::Op(p), _) => {
                let g = &p.geometry;
                for e in self.graph.edges_from(cur) {
                    let j = self.graph.target(e);
                    if j != 0
                        && !self.visited[j]
                        && self.length + g.dist(cur, j) + g.dist(j, 0) <= p.max_length
                    {
                        out.push(Component { target: j, field: Some(e) });
                    }
                }
                if cur != 0 {
                    out.push(self.edge_component(0).unwrap_or(Component { target: 0, field: None }));
                } else if out.is_empty() {
                    out.push(Component { target: 0, field: None });
                }
            }
            (ProblemData::Pctsp(p), _) => {
                for e in self.graph.edges_from(cur) {
                    let j = self.graph.target(e);
                    if j != 0 && !self.visited[j] {
                        out.push(Component { target: j, field: Some(e) });
                    }
                }
                let satisfied = self.prize >= p.min_prize;
                if satisfied && cur != 0 {
                    out.push(self.edge_component(0).unwrap_or(Component { target: 0, field: None }));
                }
                if out.is_empty() {
                    out.extend(
                        (1..self.visited.len())
                            .filter(|&j| !self.visited[j])
                            .map(|j| Component { target: j, field: None }),
                    );
                }
                if out.is_empty() {
                    out.push(self.edge_component(0).unwrap_or(Component { target: 0, field: None }));
                }
            }
            (ProblemData::Smtwtp(_), _) => {
                for e in self.graph.edges_from(cur) {
                    let j = self.graph.target(e);
                    if !self.visited[j] {
                        out.push(Component { target: j, field: Some(e) });
                    }
                }
            }
            (ProblemData::Mkp(_), PheromoneModel::Successor) => {
                out.extend(self.open.iter().filter_map(|&j| self.edge_component(j + 1)));
            }
            (ProblemData::Mkp(_), PheromoneModel::Items) => {
                out.extend(self.open.iter().map(|&j| Component { target: j, field: Some(j) }));
            }
        }
    }

    /// Appends `c` and updates the accumulators.
    pub fn apply(&mut self, c: Component) -> Result<()> {
        if self.is_finished() {
            return Err(Error::InconsistentState("apply after completion".into()));
        }
        let j = c.target;
        if j >= self.visited.len() {
            return Err(Error::InconsistentState(format!("component target {j} out of range")));
        }
        let cur = self.current;
        match &self.instance.data {
            ProblemData::Op(p) if j == 0 => {
                self.length += p.geometry.dist(cur, 0);
                self.finished = true;
                return Ok(());
            }
            ProblemData::Pctsp(p) if j == 0 => {
                if self.prize < p.min_prize && self.route.len() < self.visited.len() {
                    return Err(Error::InconsistentState("depot return before prize is met".into()));
                }
                self.length += p.geometry.dist(cur, 0);
                self.finished = true;
                return Ok(());
            }
            _ => {}
        }
        if self.visited[j] {
            return Err(Error::InconsistentState(format!("{j} selected twice")));
        }
        self.visited[j] = true;
        self.route.push(j);
        self.current = j;
        match &self.instance.data {
            ProblemData::Tsp(p) => self.length += p.geometry.dist(cur, j),
            ProblemData::Op(p) => {
                self.length += p.geometry.dist(cur, j);
                self.prize += p.prizes[j];
            }
            ProblemData::Pctsp(p) => {
                self.length += p.geometry.dist(cur, j);
                self.prize += p.prizes[j];
            }
            ProblemData::Smtwtp(p) => self.elapsed += p.processing[j - 1],
            ProblemData::Mkp(p) => {
                let item = match self.model {
                    PheromoneModel::Successor => j - 1,
                    PheromoneModel::Items => j,
                };
                for (r, row) in self.residual.iter_mut().zip(&p.weights) {
                    *r -= row[item];
                }
                if self.residual.iter().any(|&r| r < -1e-12) {
                    return Err(Error::InconsistentState(format!("item {item} exceeds capacity")));
                }
                self.refresh_open();
            }
        }
        Ok(())
    }

    /// Marks construction as stopped when no component is feasible; errors
    /// for problems that must be completed.
    pub fn finish(&mut self) -> Result<()> {
        match self.instance.kind() {
            ProblemKind::Op | ProblemKind::Mkp => {
                self.finished = true;
                Ok(())
            }
            _ if self.is_finished() => Ok(()),
            _ => Err(Error::DeadEnd {
                step: self.route.len(),
            }),
        }
    }

    pub fn into_solution(self) -> Solution {
        let shift = |route: Vec<usize>| route.into_iter().skip(1).map(|j| j - 1).collect();
        match (self.instance.kind(), self.model) {
            (ProblemKind::Smtwtp, _) | (ProblemKind::Mkp, PheromoneModel::Successor) => {
                Solution(shift(self.route))
            }
            _ => Solution(self.route),
        }
    }

    /// Accumulators recomputed from the partial solution alone:
    /// `(length, prize, elapsed, residual)`.
    pub fn recompute(&self) -> (f64, f64, f64, Vec<f64>) {
        let mut length = 0.0;
        let mut prize = 0.0;
        let mut elapsed = 0.0;
        let mut residual = Vec::new();
        match &self.instance.data {
            ProblemData::Tsp(p) => {
                length = self.route.windows(2).map(|w| p.geometry.dist(w[0], w[1])).sum();
            }
            ProblemData::Op(p) => {
                length = self.route.windows(2).map(|w| p.geometry.dist(w[0], w[1])).sum();
                if self.finished {
                    length += p.geometry.dist(*self.route.last().expect("depot"), 0);
                }
                prize = self.route.iter().map(|&j| p.prizes[j]).sum();
            }
            ProblemData::Pctsp(p) => {
                length = self.route.windows(2).map(|w| p.geometry.dist(w[0], w[1])).sum();
                if self.finished {
                    length += p.geometry.dist(*self.route.last().expect("depot"), 0);
                }
                prize = self.route.iter().map(|&j| p.prizes[j]).sum();
            }
            ProblemData::Smtwtp(p) => {
                elapsed = self.route.iter().skip(1).map(|&j| p.processing[j - 1]).sum();
            }
            ProblemData::Mkp(p) => {
                let items: Vec<usize> = match self.model {
                    PheromoneModel::Successor => self.route.iter().skip(1).map(|&j| j - 1).collect(),
                    PheromoneModel::Items => self.route.clone(),
                };
                residual = p
                    .capacities
                    .iter()
                    .zip(&p.weights)
                    .map(|(&c, row)| c - items.iter().map(|&j| row[j]).sum::<f64>())
                    .collect();
            }
        }
        (length, prize, elapsed, residual)
    }
}
