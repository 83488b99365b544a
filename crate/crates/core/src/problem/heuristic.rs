use serde::{Deserialize, Serialize};

use super::graph::ConstructionGraph;
use super::instance::{Instance, ProblemData};
use super::PheromoneModel;
use crate::error::{Error, Result};

/// Floor applied to heuristic measures and pheromone trails before they
/// enter a power or a logarithm.
pub const EPS_ETA: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Expert,
    Learned,
    LearnedHead(usize),
    Uniform,
}

/// Per-component heuristic measures: one entry per construction-graph edge
/// (successor model) or per item (item model).
#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicField {
    model: PheromoneModel,
    values: Vec<f64>,
    provenance: Provenance,
}

impl HeuristicField {
    /// Entries are floored at [`EPS_ETA`]; non-finite entries are rejected.
    pub fn new(model: PheromoneModel, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite heuristic measure {v}")));
        }
        let values = values.into_iter().map(|v| v.max(EPS_ETA)).collect();
        Ok(Self {
            model,
            values,
            provenance,
        })
    }

    pub fn uniform(model: PheromoneModel, len: usize) -> Self {
        Self {
            model,
            values: vec![1.0; len],
            provenance: Provenance::Uniform,
        }
    }

    /// Expert-designed measures for the instance.
    pub fn expert(instance: &Instance, graph: &ConstructionGraph, model: PheromoneModel) -> Result<Self> {
        let values = match model {
            PheromoneModel::Successor => (0..graph.edge_count())
                .map(|e| expert_pair(instance, graph.source(e), graph.target(e)))
                .collect(),
            PheromoneModel::Items => {
                let mkp = instance.as_mkp().ok_or(Error::Unsupported {
                    kind: instance.kind(),
                    what: "the item pheromone model",
                })?;
                (0..mkp.values.len())
                    .map(|j| mkp_ratio(mkp.values[j], mkp.total_weight(j)))
                    .collect()
            }
        };
        Self::new(model, values, Provenance::Expert)
    }

    pub fn model(&self) -> PheromoneModel {
        self.model
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks that the field matches the instance's graph or item count.
    pub fn check_shape(&self, instance: &Instance, graph: &ConstructionGraph) -> Result<()> {
        let expected = match self.model {
            PheromoneModel::Successor => graph.edge_count(),
            PheromoneModel::Items => instance.size(),
        };
        if self.values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "heuristic field has {} entries, expected {expected}",
                self.values.len()
            )));
        }
        Ok(())
    }
}

fn safe_div(num: f64, den: f64) -> f64 {
    (num / den.max(EPS_ETA)).max(EPS_ETA)
}

fn mkp_ratio(value: f64, total_weight: f64) -> f64 {
    safe_div(value, total_weight)
}

/// Expert measure of the successor component `i -> j` in graph node
/// indices; defined for every ordered pair, not only sparsified edges.
pub fn expert_pair(instance: &Instance, i: usize, j: usize) -> f64 {
    match &instance.data {
        ProblemData::Tsp(p) => safe_div(1.0, p.geometry.dist(i, j)),
        ProblemData::Op(p) => safe_div(p.prizes[j], p.geometry.dist(i, j)),
        ProblemData::Pctsp(p) => safe_div(p.prizes[j], p.geometry.dist(i, j)),
        ProblemData::Smtwtp(p) => {
            if j == 0 {
                EPS_ETA
            } else {
                safe_div(1.0, p.due[j - 1])
            }
        }
        ProblemData::Mkp(p) => {
            if j == 0 {
                EPS_ETA
            } else {
                mkp_ratio(p.values[j - 1], p.total_weight(j - 1))
            }
        }
    }
}
