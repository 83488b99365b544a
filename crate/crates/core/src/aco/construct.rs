use rand::Rng;

use super::pheromone::PheromoneField;
use crate::error::{Error, Result};
use crate::problem::{
    expert_pair, objective, Component, ConstructionGraph, ConstructionState, HeuristicField, Instance,
    PheromoneModel, ProblemKind, Solution, EPS_ETA,
};

/// Field-indexed choices made during one construction: for every step
/// whose candidates all lie on the heuristic field, the chosen index and
/// the candidate indices. Steps outside the field (fallbacks, forced
/// terminators) do not depend on the field and are omitted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChoiceRecord {
    pub chosen: Vec<usize>,
    pub offsets: Vec<usize>,
    pub candidates: Vec<usize>,
}

impl ChoiceRecord {
    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    /// Candidates of step `k`.
    pub fn step(&self, k: usize) -> (usize, &[usize]) {
        (self.chosen[k], &self.candidates[self.offsets[k]..self.offsets[k + 1]])
    }

    fn push(&mut self, chosen: usize, candidates: &[Component]) {
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        self.chosen.push(chosen);
        self.candidates.extend(candidates.iter().map(|c| c.field.expect("field-backed step")));
        self.offsets.push(self.candidates.len());
    }
}

/// One constructed solution with its construction log-probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub solution: Solution,
    /// `Σ_t log P(s_t | s_<t)` over every sampled step. For TSP the
    /// uniformly drawn start city is not included.
    pub log_prob: f64,
    pub objective: f64,
    /// Local-search refined solution and objective, when computed.
    pub refined: Option<(Solution, f64)>,
    pub choices: Option<ChoiceRecord>,
    /// Decoder head whose measures guided this ant.
    pub head: usize,
}

/// Samples solutions from `P ∝ (τ+ε)^α (η+ε)^β` over the feasible
/// components, with the per-component weights precomputed.
pub struct Sampler<'a> {
    instance: &'a Instance,
    graph: &'a ConstructionGraph,
    pheromone: &'a PheromoneField,
    model: PheromoneModel,
    alpha: f64,
    beta: f64,
    weights: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(
        instance: &'a Instance,
        graph: &'a ConstructionGraph,
        pheromone: &'a PheromoneField,
        eta: &HeuristicField,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::InvalidArgument(format!("α={alpha}, β={beta} must be nonnegative")));
        }
        let model = eta.model();
        if pheromone.model() != model {
            return Err(Error::InvalidArgument("pheromone and heuristic models differ".into()));
        }
        eta.check_shape(instance, graph)?;
        let nodes = instance.graph_nodes();
        let weights = match model {
            PheromoneModel::Successor => (0..graph.edge_count())
                .map(|e| {
                    let tau = pheromone.get(graph.source(e) * nodes + graph.target(e));
                    weight(tau, eta.values()[e], alpha, beta)
                })
                .collect(),
            PheromoneModel::Items => (0..eta.len())
                .map(|j| weight(pheromone.get(j), eta.values()[j], alpha, beta))
                .collect(),
        };
        Ok(Self {
            instance,
            graph,
            pheromone,
            model,
            alpha,
            beta,
            weights,
        })
    }

    /// Per-field-index selection weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of a candidate leaving `current`.
    pub fn component_weight(&self, current: usize, c: Component) -> f64 {
        match c.field {
            Some(f) => self.weights[f],
            None => {
                let nodes = self.instance.graph_nodes();
                let tau = self.pheromone.get(current * nodes + c.target);
                weight(tau, expert_pair(self.instance, current, c.target), self.alpha, self.beta)
            }
        }
    }

    /// Builds one solution. With `record`, field-backed choices are kept
    /// for likelihood replay.
    pub fn construct<R: Rng + ?Sized>(&self, rng: &mut R, record: bool) -> Result<Trajectory> {
        let start = match (self.instance.kind(), self.model) {
            (ProblemKind::Tsp, PheromoneModel::Successor) => rng.gen_range(0..self.instance.graph_nodes()),
            _ => 0,
        };
        let mut state = ConstructionState::new(self.instance, self.graph, self.model, start)?;
        let mut feasible = Vec::new();
        let mut w = Vec::new();
        let mut log_prob = 0.0;
        let mut choices = record.then(ChoiceRecord::default);
        loop {
            if state.is_finished() {
                break;
            }
            state.feasible(&mut feasible);
            if feasible.is_empty() {
                state.finish()?;
                break;
            }
            let cur = state.current();
            w.clear();
            w.extend(feasible.iter().map(|&c| self.component_weight(cur, c)));
            let total: f64 = w.iter().sum();
            let k = roulette(&w, total, rng);
            log_prob += w[k].ln() - total.ln();
            let chosen = feasible[k];
            if let Some(rec) = choices.as_mut() {
                if feasible.iter().all(|c| c.field.is_some()) {
                    rec.push(chosen.field.expect("field-backed step"), &feasible);
                }
            }
            state.apply(chosen)?;
        }
        let solution = state.into_solution();
        let objective = objective(self.instance, &solution)?;
        Ok(Trajectory {
            solution,
            log_prob,
            objective,
            refined: None,
            choices,
            head: 0,
        })
    }
}

#[inline]
fn weight(tau: f64, eta: f64, alpha: f64, beta: f64) -> f64 {
    let t = tau + EPS_ETA;
    let h = eta + EPS_ETA;
    let tw = if alpha == 1.0 { t } else { t.powf(alpha) };
    let hw = if beta == 1.0 { h } else { h.powf(beta) };
    tw * hw
}

/// Index drawn with probability proportional to `w`, using one uniform
/// draw against the cumulative sums.
pub fn roulette<R: Rng + ?Sized>(w: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (k, &x) in w.iter().enumerate() {
        acc += x;
        if target < acc {
            return k;
        }
    }
    // Rounding can leave `target` at the very top; take the last positive.
    w.iter().rposition(|&x| x > 0.0).unwrap_or(w.len() - 1)
}
