//! Ant colony construction and pheromone evolution: Ant System, Elitist
//! AS and MAX-MIN AS over successor and item pheromone models.

mod colony;
mod construct;
mod pheromone;

use serde::{Deserialize, Serialize};

pub use colony::{mean_curve, pure_sample, run_colony, Colony, EvolutionLog, LogPoint};
pub use construct::{roulette, ChoiceRecord, Sampler, Trajectory};
pub use pheromone::{PheromoneField, Scored};

use crate::error::{Error, Result};
use crate::local_search::LocalSearch;
use crate::problem::PheromoneModel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    AntSystem,
    Elitist,
    MaxMin,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "as" | "antsystem" => Ok(Variant::AntSystem),
            "elitist" | "eas" => Ok(Variant::Elitist),
            "maxmin" | "mmas" => Ok(Variant::MaxMin),
            other => Err(format!("unknown ACO variant `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcoConfig {
    pub variant: Variant,
    pub model: PheromoneModel,
    pub n_ants: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Evaporation rate ρ.
    pub decay: f64,
    /// Deposit scale Q.
    pub deposit: f64,
    /// Elitist deposit multiplier; `None` means `ceil(n_ants / 10)`.
    pub elitist_weight: Option<f64>,
    pub tau0: f64,
    /// Objective evaluations to spend; whole iterations run until reached.
    pub budget: usize,
    pub seed: u64,
    pub local_search: LocalSearch,
}

impl Default for AcoConfig {
    fn default() -> Self {
        Self {
            variant: Variant::AntSystem,
            model: PheromoneModel::Successor,
            n_ants: 20,
            alpha: 1.0,
            beta: 1.0,
            decay: 0.1,
            deposit: 1.0,
            elitist_weight: None,
            tau0: 1.0,
            budget: 4000,
            seed: 0,
            local_search: LocalSearch::None,
        }
    }
}

impl AcoConfig {
    pub fn elitist_weight(&self) -> f64 {
        self.elitist_weight.unwrap_or_else(|| self.n_ants.div_ceil(10) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_ants == 0 {
            return bad("n_ants must be >= 1".into());
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return bad(format!("α={} and β={} must be finite and nonnegative", self.alpha, self.beta));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return bad(format!("decay {} must lie in (0, 1)", self.decay));
        }
        if !(self.deposit > 0.0 && self.deposit.is_finite()) {
            return bad(format!("deposit scale {} must be positive", self.deposit));
        }
        if self.elitist_weight.is_some_and(|w| !(w >= 0.0 && w.is_finite())) {
            return bad("elitist weight must be nonnegative".into());
        }
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return bad(format!("initial pheromone {} must be positive", self.tau0));
        }
        if self.budget == 0 {
            return bad("evaluation budget must be >= 1".into());
        }
        if let LocalSearch::Nls(c) | LocalSearch::RandomPerturbation(c) = &self.local_search {
            c.validate()?;
        }
        Ok(())
    }
}
