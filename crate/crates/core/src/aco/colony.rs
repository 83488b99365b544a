use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::construct::Sampler;
use super::pheromone::{PheromoneField, Scored};
use super::AcoConfig;
use crate::error::{Error, Result};
use crate::local_search::LocalSearchContext;
use crate::problem::{objective, solution_components, ConstructionGraph, HeuristicField, Instance, Solution};

/// Best-so-far objective after a number of objective evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogPoint {
    pub evaluations: usize,
    pub best_objective: f64,
}

/// Best-so-far trace of one colony run, one point per iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionLog {
    pub points: Vec<LogPoint>,
    pub best_solution: Solution,
    pub best_objective: f64,
}

impl EvolutionLog {
    pub fn evaluations(&self) -> usize {
        self.points.last().map_or(0, |p| p.evaluations)
    }

    /// Best-so-far value once `evaluations` had been spent (step
    /// interpolation; before the first point, the first point's value).
    pub fn best_at(&self, evaluations: usize) -> f64 {
        let k = self.points.partition_point(|p| p.evaluations <= evaluations);
        self.points[k.saturating_sub(1)].best_objective
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("evaluations,best_objective\n");
        for p in &self.points {
            writeln!(out, "{},{}", p.evaluations, p.best_objective).expect("write to string");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Mean of the logs' best-so-far values at each of `points`.
pub fn mean_curve(logs: &[EvolutionLog], points: &[usize]) -> Vec<f64> {
    points
        .iter()
        .map(|&x| logs.iter().map(|l| l.best_at(x)).sum::<f64>() / logs.len().max(1) as f64)
        .collect()
}

/// An ant colony bound to one instance, its graph and one or more heuristic
/// fields (decoder heads). Ant `k` of each iteration follows head
/// `k % heads`.
pub struct Colony<'a> {
    instance: &'a Instance,
    graph: &'a ConstructionGraph,
    heads: &'a [HeuristicField],
    config: AcoConfig,
    local: Option<LocalSearchContext>,
}

impl<'a> Colony<'a> {
    pub fn new(
        instance: &'a Instance,
        graph: &'a ConstructionGraph,
        heads: &'a [HeuristicField],
        config: AcoConfig,
    ) -> Result<Self> {
        config.validate()?;
        if heads.is_empty() {
            return Err(Error::InvalidArgument("at least one heuristic field is required".into()));
        }
        for h in heads {
            if h.model() != config.model {
                return Err(Error::InvalidArgument(format!(
                    "heuristic field is {:?}, colony uses {:?}",
                    h.model(),
                    config.model
                )));
            }
            h.check_shape(instance, graph)?;
        }
        let local = if config.local_search.is_none() {
            None
        } else {
            Some(LocalSearchContext::new(instance, graph, heads)?)
        };
        Ok(Self {
            instance,
            graph,
            heads,
            config,
            local,
        })
    }

    pub fn config(&self) -> &AcoConfig {
        &self.config
    }

    /// Runs whole iterations until the evaluation budget is reached,
    /// updating pheromones after each when `evolve` is set and keeping
    /// `τ ≡ τ0` otherwise.
    pub fn run(&self, evolve: bool) -> Result<EvolutionLog> {
        let cfg = &self.config;
        let kind = self.instance.kind();
        let mut tau = PheromoneField::new(self.instance, cfg.model, cfg.tau0)?;
        let mut best: Option<(Solution, Scored)> = None;
        let mut points = Vec::new();
        let mut evaluations = 0usize;
        let mut iteration = 0usize;
        let mut ants = Vec::with_capacity(cfg.n_ants);
        while evaluations < cfg.budget {
            let samplers = self
                .heads
                .iter()
                .map(|h| Sampler::new(self.instance, self.graph, &tau, h, cfg.alpha, cfg.beta))
                .collect::<Result<Vec<_>>>()?;
            ants.clear();
            let mut iteration_best: Option<(Solution, f64)> = None;
            for k in 0..cfg.n_ants {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream((iteration * cfg.n_ants + k) as u64);
                let head = k % self.heads.len();
                let traj = samplers[head].construct(&mut rng, false)?;
                evaluations += 1;
                let (solution, value) = match &self.local {
                    Some(ctx) => {
                        let (s, evals) = ctx.improve(&cfg.local_search, &traj.solution, head, &mut rng)?;
                        evaluations += evals;
                        let v = objective(self.instance, &s)?;
                        (s, v)
                    }
                    None => (traj.solution, traj.objective),
                };
                if iteration_best.as_ref().is_none_or(|(_, b)| value < *b) {
                    iteration_best = Some((solution.clone(), value));
                }
                ants.push(Scored {
                    components: solution_components(self.instance, cfg.model, &solution),
                    objective: value,
                });
            }
            drop(samplers);
            if let Some((s, v)) = iteration_best {
                if best.as_ref().is_none_or(|(_, b)| v < b.objective) {
                    let components = solution_components(self.instance, cfg.model, &s);
                    best = Some((s, Scored { components, objective: v }));
                }
            }
            let best_value = best.as_ref().map(|(_, b)| b.objective).expect("at least one ant");
            points.push(LogPoint {
                evaluations,
                best_objective: best_value,
            });
            if evolve {
                tau.update(kind, &ants, best.as_ref().map(|(_, b)| b), cfg, iteration)?;
            }
            iteration += 1;
        }
        let (best_solution, scored) = best.expect("budget >= 1 runs one iteration");
        Ok(EvolutionLog {
            points,
            best_solution,
            best_objective: scored.objective,
        })
    }
}

/// ACO evolution on one instance.
pub fn run_colony(
    instance: &Instance,
    graph: &ConstructionGraph,
    heads: &[HeuristicField],
    config: &AcoConfig,
) -> Result<EvolutionLog> {
    Colony::new(instance, graph, heads, *config)?.run(true)
}

/// Repeated sampling with pheromones fixed at `τ0` and no updates, under
/// the same budget accounting as [`run_colony`].
pub fn pure_sample(
    instance: &Instance,
    graph: &ConstructionGraph,
    heads: &[HeuristicField],
    config: &AcoConfig,
) -> Result<EvolutionLog> {
    Colony::new(instance, graph, heads, *config)?.run(false)
}
