use crate::error::{Error, Result};
use crate::problem::{Instance, PheromoneModel, ProblemKind, EPS_ETA};

use super::{AcoConfig, Variant};

/// Pheromone trails indexed like [`crate::problem::solution_components`]:
/// `i * N + j` for successor pairs, the item index for the item model.
#[derive(Clone, Debug, PartialEq)]
pub struct PheromoneField {
    model: PheromoneModel,
    values: Vec<f64>,
    bounds: Option<(f64, f64)>,
    /// Number of decision variables, used for the MAX-MIN lower bound.
    size: usize,
    nodes: usize,
    symmetric: bool,
}

/// A solution's pheromone components with its internal objective.
#[derive(Clone, Debug, PartialEq)]
pub struct Scored {
    pub components: Vec<usize>,
    pub objective: f64,
}

impl PheromoneField {
    /// Trails initialised to `tau0` for the instance's pheromone model.
    pub fn new(instance: &Instance, model: PheromoneModel, tau0: f64) -> Result<Self> {
        if !(tau0 > 0.0 && tau0.is_finite()) {
            return Err(Error::InvalidArgument(format!("initial pheromone {tau0} must be positive")));
        }
        let len = match model {
            PheromoneModel::Successor => instance.graph_nodes() * instance.graph_nodes(),
            PheromoneModel::Items => instance.size(),
        };
        Ok(Self {
            model,
            values: vec![tau0; len],
            bounds: None,
            size: instance.size(),
            nodes: instance.graph_nodes(),
            symmetric: instance.kind() == ProblemKind::Tsp && model == PheromoneModel::Successor,
        })
    }

    pub fn model(&self) -> PheromoneModel {
        self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, component: usize) -> f64 {
        self.values[component]
    }

    /// `(τ_min, τ_max)` once a MAX-MIN update has set them.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    /// Deposit amount for a solution: `Q/f` when minimizing (with `f`
    /// floored at `EPS_ETA`, so zero-cost schedules still deposit), `Q·(−f)`
    /// for negated maximization objectives.
    pub fn deposit_amount(kind: ProblemKind, q: f64, objective: f64) -> Result<f64> {
        if kind.maximizes() {
            Ok(q * (-objective).max(0.0))
        } else if objective >= 0.0 && objective.is_finite() {
            Ok(q / objective.max(EPS_ETA))
        } else {
            Err(Error::NonPositiveObjective(objective))
        }
    }

    fn deposit(&mut self, components: &[usize], amount: f64) {
        let nodes = self.nodes;
        for &c in components {
            self.values[c] += amount;
            if self.symmetric {
                let (i, j) = (c / nodes, c % nodes);
                self.values[j * nodes + i] += amount;
            }
        }
    }

    /// One evaporation-and-deposit step. `iteration` selects the MAX-MIN
    /// depositor: iteration-best on even iterations, best-so-far on odd.
    pub fn update(
        &mut self,
        kind: ProblemKind,
        ants: &[Scored],
        best_so_far: Option<&Scored>,
        config: &AcoConfig,
        iteration: usize,
    ) -> Result<()> {
        let keep = 1.0 - config.decay;
        for v in &mut self.values {
            *v = (*v * keep).max(f64::MIN_POSITIVE);
        }
        match config.variant {
            Variant::AntSystem | Variant::Elitist => {
                for ant in ants {
                    let amount = Self::deposit_amount(kind, config.deposit, ant.objective)?;
                    self.deposit(&ant.components, amount);
                }
                if config.variant == Variant::Elitist {
                    if let Some(best) = best_so_far {
                        let amount = config.elitist_weight() * Self::deposit_amount(kind, config.deposit, best.objective)?;
                        self.deposit(&best.components, amount);
                    }
                }
            }
            Variant::MaxMin => {
                let iteration_best = ants.iter().min_by(|a, b| a.objective.total_cmp(&b.objective));
                let depositor = if iteration % 2 == 1 {
                    best_so_far.or(iteration_best)
                } else {
                    iteration_best.or(best_so_far)
                };
                if let Some(ant) = depositor {
                    let amount = Self::deposit_amount(kind, config.deposit, ant.objective)?;
                    self.deposit(&ant.components, amount);
                }
                let reference = best_so_far.or(iteration_best);
                if let Some(best) = reference {
                    let amount = Self::deposit_amount(kind, config.deposit, best.objective)?;
                    if amount > 0.0 {
                        let tau_max = amount / config.decay;
                        let tau_min = tau_max / (2.0 * self.size as f64);
                        self.bounds = Some((tau_min, tau_max));
                    }
                }
                if let Some((lo, hi)) = self.bounds {
                    for v in &mut self.values {
                        *v = v.clamp(lo, hi);
                    }
                }
            }
        }
        if let Some(v) = self.values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidArgument(format!("pheromone update produced {v}")));
        }
        Ok(())
    }
}
