use super::instance::{Instance, ProblemData};
use super::{PheromoneModel, Solution};
use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

fn distinct(items: &[usize], bound: usize, what: &str) -> Result<Vec<bool>> {
    let mut seen = vec![false; bound];
    for &x in items {
        if x >= bound {
            return Err(Error::Infeasible(format!("{what} {x} out of range")));
        }
        if std::mem::replace(&mut seen[x], true) {
            return Err(Error::Infeasible(format!("{what} {x} repeated")));
        }
    }
    Ok(seen)
}

fn depot_route(route: &[usize], nodes: usize) -> Result<Vec<bool>> {
    if route.first() != Some(&0) {
        return Err(Error::Infeasible("route must start at the depot".into()));
    }
    distinct(route, nodes, "node")
}

/// Internal objective, lower is better for every kind. Maximization
/// problems (orienteering prize, knapsack value) are negated.
pub fn objective(instance: &Instance, solution: &Solution) -> Result<f64> {
    let s = solution.as_slice();
    match &instance.data {
        ProblemData::Tsp(p) => {
            let n = p.geometry.len();
            if s.len() != n {
                return Err(Error::Infeasible(format!("tour visits {} of {n} cities", s.len())));
            }
            distinct(s, n, "city")?;
            Ok(p.geometry.tour_length(s))
        }
        ProblemData::Op(p) => {
            depot_route(s, p.geometry.len())?;
            let length = p.geometry.tour_length(s);
            if length > p.max_length + TOL {
                return Err(Error::Infeasible(format!(
                    "tour length {length} exceeds budget {}",
                    p.max_length
                )));
            }
            Ok(-s.iter().map(|&j| p.prizes[j]).sum::<f64>())
        }
        ProblemData::Pctsp(p) => {
            let seen = depot_route(s, p.geometry.len())?;
            let prize: f64 = s.iter().map(|&j| p.prizes[j]).sum();
            if prize + TOL < p.min_prize {
                return Err(Error::Infeasible(format!(
                    "collected prize {prize} below minimum {}",
                    p.min_prize
                )));
            }
            let penalty: f64 = (1..seen.len()).filter(|&j| !seen[j]).map(|j| p.penalties[j]).sum();
            Ok(p.geometry.tour_length(s) + penalty)
        }
        ProblemData::Smtwtp(p) => {
            let n = p.due.len();
            if s.len() != n {
                return Err(Error::Infeasible(format!("schedule covers {} of {n} jobs", s.len())));
            }
            distinct(s, n, "job")?;
            let mut clock = 0.0;
            let mut total = 0.0;
            for &j in s {
                clock += p.processing[j];
                total += p.weight[j] * (clock - p.due[j]).max(0.0);
            }
            Ok(total)
        }
        ProblemData::Mkp(p) => {
            distinct(s, p.values.len(), "item")?;
            for (i, (row, &cap)) in p.weights.iter().zip(&p.capacities).enumerate() {
                let load: f64 = s.iter().map(|&j| row[j]).sum();
                if load > cap + TOL {
                    return Err(Error::Infeasible(format!(
                        "constraint {i}: load {load} exceeds capacity {cap}"
                    )));
                }
            }
            Ok(-s.iter().map(|&j| p.values[j]).sum::<f64>())
        }
    }
}

/// Pheromone indices of the components used by `solution`: `i * N + j`
/// for successor pairs over `N = instance.graph_nodes()`, item indices for
/// the item model.
pub fn solution_components(instance: &Instance, model: PheromoneModel, solution: &Solution) -> Vec<usize> {
    let s = solution.as_slice();
    let nodes = instance.graph_nodes();
    let pair = |i: usize, j: usize| i * nodes + j;
    match (&instance.data, model) {
        (_, PheromoneModel::Items) => s.to_vec(),
        (ProblemData::Tsp(_), _) => (0..s.len()).map(|k| pair(s[k], s[(k + 1) % s.len()])).collect(),
        (ProblemData::Op(_) | ProblemData::Pctsp(_), _) => {
            if s.len() < 2 {
                return Vec::new();
            }
            (0..s.len()).map(|k| pair(s[k], s[(k + 1) % s.len()])).collect()
        }
        (ProblemData::Smtwtp(_) | ProblemData::Mkp(_), _) => {
            let mut prev = 0;
            s.iter()
                .map(|&j| {
                    let c = pair(prev, j + 1);
                    prev = j + 1;
                    c
                })
                .collect()
        }
    }
}
