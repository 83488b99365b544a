use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::costs::CostField;
use super::two_opt::{random_perturb, two_opt, two_opt_ordered, LengthGuard};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NlsConfig {
    /// Outer perturb-then-refine iterations.
    pub iterations: usize,
    /// Accepted perturbation moves per iteration.
    pub perturbation_moves: usize,
}

impl Default for NlsConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            perturbation_moves: 20,
        }
    }
}

impl NlsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.perturbation_moves == 0 {
            return Err(Error::InvalidArgument("perturbation moves must be >= 1".into()));
        }
        Ok(())
    }
}

/// How the perturbation stage of [`nls`] moves away from a local optimum.
pub enum Perturbation<'a> {
    /// 2-opt descent on the given surrogate costs (typically `1/η`),
    /// scanning cities in a fresh random order each time.
    Guided(&'a CostField),
    /// Uniformly random 2-opt exchanges.
    Random,
}

/// Best tour found by [`nls`] with its length and the number of full
/// objective evaluations (one per refined local optimum).
#[derive(Clone, Debug, PartialEq)]
pub struct NlsOutcome {
    pub tour: Vec<usize>,
    pub length: f64,
    pub evaluations: usize,
}

/// Refine to a local optimum, then alternate perturbation and refinement,
/// keeping the shortest refined tour. An optional length budget constrains
/// every accepted move. Refinement is deterministic; `rng` drives the
/// perturbation.
pub fn nls(
    tour: &[usize],
    distances: &CostField,
    perturbation: Perturbation<'_>,
    config: &NlsConfig,
    budget: Option<f64>,
    rng: &mut dyn RngCore,
) -> Result<NlsOutcome> {
    config.validate()?;
    let mut current = tour.to_vec();
    let mut guard = budget.map(|b| LengthGuard {
        distances,
        budget: b,
        length: distances.tour_cost(tour),
    });
    two_opt(&mut current, distances, None, guard.as_mut())?;
    let mut best = current.clone();
    let mut best_len = distances.tour_cost(&best);
    let mut evaluations = 1;
    let mut order: Vec<usize> = (0..distances.len()).collect();
    for _ in 0..config.iterations {
        match perturbation {
            Perturbation::Guided(surrogate) => {
                order.shuffle(rng);
                two_opt_ordered(
                    &mut current,
                    surrogate,
                    Some(config.perturbation_moves),
                    guard.as_mut(),
                    Some(&order),
                )?;
            }
            Perturbation::Random => {
                if budget.is_some() {
                    return Err(Error::InvalidArgument(
                        "random perturbation does not support a length budget".into(),
                    ));
                }
                random_perturb(&mut current, config.perturbation_moves, rng);
            }
        }
        two_opt(&mut current, distances, None, guard.as_mut())?;
        let len = distances.tour_cost(&current);
        evaluations += 1;
        if len < best_len {
            best_len = len;
            best.clone_from(&current);
        }
    }
    Ok(NlsOutcome {
        tour: best,
        length: best_len,
        evaluations,
    })
}
