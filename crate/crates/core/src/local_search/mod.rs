//! 2-opt local search and its interleaving with heuristic-guided
//! perturbation.

mod costs;
mod nls;
mod two_opt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use costs::CostField;
pub use nls::{nls, NlsConfig, NlsOutcome, Perturbation};
pub use two_opt::{has_improving_move, random_perturb, two_opt, two_opt_ordered, LengthGuard, TwoOptStats};

use crate::error::{Error, Result};
use crate::problem::{ConstructionGraph, HeuristicField, Instance, ProblemData, Solution};

/// Local search applied to every constructed solution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LocalSearch {
    #[default]
    None,
    /// Plain 2-opt to a local optimum.
    TwoOpt,
    /// 2-opt interleaved with perturbation toward higher heuristic measure.
    Nls(NlsConfig),
    /// Same schedule with random instead of guided perturbation.
    RandomPerturbation(NlsConfig),
}

impl LocalSearch {
    pub fn is_none(&self) -> bool {
        matches!(self, LocalSearch::None)
    }
}

/// Per-instance cost fields reused across all local-search calls.
pub struct LocalSearchContext {
    distances: CostField,
    surrogates: Vec<CostField>,
    budget: Option<f64>,
    depot: bool,
}

impl LocalSearchContext {
    /// `heads` supply the perturbation surrogates; routing problems only.
    pub fn new(instance: &Instance, graph: &ConstructionGraph, heads: &[HeuristicField]) -> Result<Self> {
        let (geometry, budget, depot) = match &instance.data {
            ProblemData::Tsp(p) => (&p.geometry, None, false),
            ProblemData::Op(p) => (&p.geometry, Some(p.max_length), true),
            ProblemData::Pctsp(p) => (&p.geometry, None, true),
            _ => {
                return Err(Error::Unsupported {
                    kind: instance.kind(),
                    what: "2-opt local search",
                })
            }
        };
        let surrogates = heads
            .iter()
            .map(|h| CostField::inverse_heuristic(graph, h))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            distances: CostField::sparse_distances(geometry, graph),
            surrogates,
            budget,
            depot,
        })
    }

    pub fn distances(&self) -> &CostField {
        &self.distances
    }

    /// Improves `solution` with `mode`, using head `head`'s surrogate for
    /// guided perturbation. Returns the new solution and the number of full
    /// objective evaluations spent.
    pub fn improve(
        &self,
        mode: &LocalSearch,
        solution: &Solution,
        head: usize,
        rng: &mut dyn RngCore,
    ) -> Result<(Solution, usize)> {
        if mode.is_none() {
            return Ok((solution.clone(), 0));
        }
        let route = solution.as_slice();
        if !self.depot {
            let surrogate = self.surrogates.get(head);
            let (tour, evals) = self.run(mode, route, &self.distances, surrogate, rng)?;
            return Ok((Solution(tour), evals));
        }
        let distances = self.distances.restrict(route);
        let surrogate = self.surrogates.get(head).map(|s| s.restrict(route));
        let local: Vec<usize> = (0..route.len()).collect();
        let (tour, evals) = self.run(mode, &local, &distances, surrogate.as_ref(), rng)?;
        let start = tour.iter().position(|&k| k == 0).expect("depot stays in the route");
        let mapped = (0..tour.len()).map(|k| route[tour[(start + k) % tour.len()]]).collect();
        Ok((Solution(mapped), evals))
    }

    fn run(
        &self,
        mode: &LocalSearch,
        tour: &[usize],
        distances: &CostField,
        surrogate: Option<&CostField>,
        rng: &mut dyn RngCore,
    ) -> Result<(Vec<usize>, usize)> {
        match mode {
            LocalSearch::None => Ok((tour.to_vec(), 0)),
            LocalSearch::TwoOpt => {
                let mut t = tour.to_vec();
                let mut guard = self.budget.map(|b| LengthGuard {
                    distances,
                    budget: b,
                    length: distances.tour_cost(tour),
                });
                two_opt(&mut t, distances, None, guard.as_mut())?;
                Ok((t, 1))
            }
            LocalSearch::Nls(cfg) => {
                let surrogate = surrogate.ok_or_else(|| {
                    Error::InvalidArgument("guided perturbation needs a heuristic field".into())
                })?;
                let out = nls(tour, distances, Perturbation::Guided(surrogate), cfg, self.budget, rng)?;
                Ok((out.tour, out.evaluations))
            }
            LocalSearch::RandomPerturbation(cfg) => {
                let out = nls(tour, distances, Perturbation::Random, cfg, self.budget, rng)?;
                Ok((out.tour, out.evaluations))
            }
        }
    }
}
