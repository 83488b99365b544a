//! Problem definitions: instances and generators, construction graphs,
//! feasibility rules, objectives and expert heuristic measures.

mod dataset;
mod graph;
mod heuristic;
mod instance;
mod objective;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dataset::{Dataset, DATASET_FORMAT, DATASET_VERSION};
pub use graph::{default_sparsity, ConstructionGraph};
pub use heuristic::{expert_pair, HeuristicField, Provenance, EPS_ETA};
pub use instance::{
    op_max_length, pctsp_reference_length, GeneratorOptions, Geometry, Instance, Mkp, Op, Pctsp,
    ProblemData, Smtwtp, Tsp,
};
pub use objective::{objective, solution_components};
pub use state::{Component, ConstructionState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Tsp,
    Op,
    Pctsp,
    Smtwtp,
    Mkp,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Tsp,
        ProblemKind::Op,
        ProblemKind::Pctsp,
        ProblemKind::Smtwtp,
        ProblemKind::Mkp,
    ];

    /// Whether the native objective is maximized (negated internally).
    pub fn maximizes(self) -> bool {
        matches!(self, ProblemKind::Op | ProblemKind::Mkp)
    }

    pub fn supports(self, model: PheromoneModel) -> bool {
        model == PheromoneModel::Successor || self == ProblemKind::Mkp
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Tsp => "TSP",
            ProblemKind::Op => "OP",
            ProblemKind::Pctsp => "PCTSP",
            ProblemKind::Smtwtp => "SMTWTP",
            ProblemKind::Mkp => "MKP",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsp" => Ok(ProblemKind::Tsp),
            "op" => Ok(ProblemKind::Op),
            "pctsp" => Ok(ProblemKind::Pctsp),
            "smtwtp" => Ok(ProblemKind::Smtwtp),
            "mkp" => Ok(ProblemKind::Mkp),
            other => Err(format!("unknown problem kind `{other}`")),
        }
    }
}

/// Where pheromone and heuristic measures live: on successor edges of the
/// construction graph, or directly on items.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PheromoneModel {
    Successor,
    Items,
}

impl FromStr for PheromoneModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "successor" | "suc" => Ok(PheromoneModel::Successor),
            "items" | "item" => Ok(PheromoneModel::Items),
            other => Err(format!("unknown pheromone model `{other}`")),
        }
    }
}

/// A complete solution, interpreted per problem kind:
///
/// * TSP: a permutation of the cities (closing edge implicit).
/// * OP / PCTSP: depot 0 followed by the visited nodes (return implicit).
/// * SMTWTP: jobs in processing order.
/// * MKP: selected items in selection order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Solution(pub Vec<usize>);

impl Solution {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
