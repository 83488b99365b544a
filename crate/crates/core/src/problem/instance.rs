use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ProblemKind;
use crate::error::{Error, Result};

/// Points in the unit square with their Euclidean distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Geometry {
    coords: Vec<[f64; 2]>,
    dist: Vec<f64>,
}

impl From<Vec<[f64; 2]>> for Geometry {
    fn from(coords: Vec<[f64; 2]>) -> Self {
        let n = coords.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let dx = coords[i][0] - coords[j][0];
                let dy = coords[i][1] - coords[j][1];
                dist[i * n + j] = (dx * dx + dy * dy).sqrt();
            }
        }
        Self { coords, dist }
    }
}

impl From<Geometry> for Vec<[f64; 2]> {
    fn from(g: Geometry) -> Self {
        g.coords
    }
}

impl Geometry {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.coords.len() + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }

    /// Length of the closed tour through `route`.
    pub fn tour_length(&self, route: &[usize]) -> f64 {
        match route.len() {
            0 | 1 => 0.0,
            n => (0..n).map(|k| self.dist(route[k], route[(k + 1) % n])).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tsp {
    pub geometry: Geometry,
}

/// Orienteering: node 0 is the depot; collect prizes within `max_length`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Op {
    pub geometry: Geometry,
    pub prizes: Vec<f64>,
    pub max_length: f64,
}

/// Prize-collecting TSP: node 0 is the depot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pctsp {
    pub geometry: Geometry,
    pub prizes: Vec<f64>,
    pub penalties: Vec<f64>,
    pub min_prize: f64,
}

/// Single machine total weighted tardiness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smtwtp {
    pub due: Vec<f64>,
    pub weight: Vec<f64>,
    pub processing: Vec<f64>,
}

/// Multidimensional knapsack: `weights[i][j]` is item `j`'s weight on
/// constraint `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mkp {
    pub values: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub capacities: Vec<f64>,
}

impl Mkp {
    pub fn constraints(&self) -> usize {
        self.capacities.len()
    }

    /// Σ_i w_ij for item `j`.
    pub fn total_weight(&self, j: usize) -> f64 {
        self.weights.iter().map(|row| row[j]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemData {
    Tsp(Tsp),
    Op(Op),
    Pctsp(Pctsp),
    Smtwtp(Smtwtp),
    Mkp(Mkp),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub seed: u64,
    pub data: ProblemData,
}

/// Generator knobs not fixed by the problem definition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorOptions {
    /// Number of knapsack constraints.
    pub mkp_constraints: usize,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self { mkp_constraints: 5 }
    }
}

fn interpolate(table: &[(f64, f64)], n: f64) -> f64 {
    let first = table[0];
    if n <= first.0 {
        return first.1;
    }
    for w in table.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if n <= x1 {
            return y0 + (y1 - y0) * (n - x0) / (x1 - x0);
        }
    }
    let ((x0, y0), (x1, y1)) = (table[table.len() - 2], table[table.len() - 1]);
    y1 + (y1 - y0) * (n - x1) / (x1 - x0)
}

/// Orienteering length budget: 2, 3, 4, 5, 6 at 20, 50, 100, 200, 300
/// nodes, linear in between.
pub fn op_max_length(n: usize) -> f64 {
    interpolate(
        &[(20.0, 2.0), (50.0, 3.0), (100.0, 4.0), (200.0, 5.0), (300.0, 6.0)],
        n as f64,
    )
}

/// Expected TSP tour length used to scale PCTSP penalties: 4, 8, 18 at
/// 20, 100, 500 nodes, linear in between.
pub fn pctsp_reference_length(n: usize) -> f64 {
    interpolate(&[(20.0, 4.0), (100.0, 8.0), (500.0, 18.0)], n as f64)
}

fn unit_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect()
}

/// Uniform draw from the open interval `(lo, hi)`.
fn open_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let v = rng.gen_range(lo..hi);
        if v > lo {
            return v;
        }
    }
}

impl Instance {
    pub fn generate(kind: ProblemKind, n: usize, seed: u64) -> Result<Self> {
        Self::generate_with(kind, n, seed, GeneratorOptions::default())
    }

    /// Deterministic in `(kind, n, seed, options)`.
    pub fn generate_with(
        kind: ProblemKind,
        n: usize,
        seed: u64,
        options: GeneratorOptions,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("instance size {n} < 2")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = match kind {
            ProblemKind::Tsp => ProblemData::Tsp(Tsp {
                geometry: unit_points(&mut rng, n).into(),
            }),
            ProblemKind::Op => {
                let geometry: Geometry = unit_points(&mut rng, n + 1).into();
                let max_d = (1..=n).map(|j| geometry.dist(0, j)).fold(0.0, f64::max);
                let mut prizes = vec![0.0];
                prizes.extend((1..=n).map(|i| {
                    let ratio = if max_d > 0.0 { geometry.dist(0, i) / max_d } else { 0.0 };
                    (1.0 + (99.0 * ratio).floor()) / 100.0
                }));
                ProblemData::Op(Op {
                    geometry,
                    prizes,
                    max_length: op_max_length(n),
                })
            }
            ProblemKind::Pctsp => {
                let geometry: Geometry = unit_points(&mut rng, n + 1).into();
                let min_prize = n as f64 / 4.0;
                let max_penalty = 3.0 * pctsp_reference_length(n) / (2.0 * n as f64);
                let prizes = loop {
                    let mut p = vec![0.0];
                    p.extend((0..n).map(|_| open_uniform(&mut rng, 0.0, 1.0)));
                    if p.iter().sum::<f64>() >= min_prize {
                        break p;
                    }
                };
                let mut penalties = vec![0.0];
                penalties.extend((0..n).map(|_| open_uniform(&mut rng, 0.0, max_penalty)));
                ProblemData::Pctsp(Pctsp {
                    geometry,
                    prizes,
                    penalties,
                    min_prize,
                })
            }
            ProblemKind::Smtwtp => {
                let due = (0..n).map(|_| n as f64 * rng.gen::<f64>()).collect();
                let weight = (0..n).map(|_| rng.gen::<f64>()).collect();
                let processing = (0..n).map(|_| rng.gen::<f64>()).collect();
                ProblemData::Smtwtp(Smtwtp {
                    due,
                    weight,
                    processing,
                })
            }
            ProblemKind::Mkp => {
                let m = options.mkp_constraints;
                if m == 0 {
                    return Err(Error::InvalidArgument("MKP needs at least one constraint".into()));
                }
                let values = (0..n).map(|_| rng.gen::<f64>()).collect();
                let weights: Vec<Vec<f64>> = (0..m)
                    .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
                    .collect();
                let capacities = weights
                    .iter()
                    .map(|row| {
                        let max = row.iter().copied().fold(0.0, f64::max);
                        let sum: f64 = row.iter().sum();
                        open_uniform(&mut rng, max, sum)
                    })
                    .collect();
                ProblemData::Mkp(Mkp {
                    values,
                    weights,
                    capacities,
                })
            }
        };
        Ok(Self { seed, data })
    }

    pub fn kind(&self) -> ProblemKind {
        match &self.data {
            ProblemData::Tsp(_) => ProblemKind::Tsp,
            ProblemData::Op(_) => ProblemKind::Op,
            ProblemData::Pctsp(_) => ProblemKind::Pctsp,
            ProblemData::Smtwtp(_) => ProblemKind::Smtwtp,
            ProblemData::Mkp(_) => ProblemKind::Mkp,
        }
    }

    /// Number of decision variables (cities, customers, jobs or items).
    pub fn size(&self) -> usize {
        match &self.data {
            ProblemData::Tsp(p) => p.geometry.len(),
            ProblemData::Op(p) => p.geometry.len() - 1,
            ProblemData::Pctsp(p) => p.geometry.len() - 1,
            ProblemData::Smtwtp(p) => p.due.len(),
            ProblemData::Mkp(p) => p.values.len(),
        }
    }

    /// Node count of the successor construction graph: routing problems use
    /// their points (depot included), scheduling and knapsack add a dummy
    /// start node 0.
    pub fn graph_nodes(&self) -> usize {
        match &self.data {
            ProblemData::Tsp(p) => p.geometry.len(),
            ProblemData::Op(p) => p.geometry.len(),
            ProblemData::Pctsp(p) => p.geometry.len(),
            ProblemData::Smtwtp(_) | ProblemData::Mkp(_) => self.size() + 1,
        }
    }

    pub fn geometry(&self) -> Option<&Geometry> {
        match &self.data {
            ProblemData::Tsp(p) => Some(&p.geometry),
            ProblemData::Op(p) => Some(&p.geometry),
            ProblemData::Pctsp(p) => Some(&p.geometry),
            _ => None,
        }
    }

    pub fn as_mkp(&self) -> Option<&Mkp> {
        match &self.data {
            ProblemData::Mkp(p) => Some(p),
            _ => None,
        }
    }

    /// Checks the generator invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let all_finite = |v: &[f64]| v.iter().all(|x| x.is_finite() && *x >= 0.0);
        if let Some(g) = self.geometry() {
            if g
                .coords()
                .iter()
                .any(|c| !(0.0..=1.0).contains(&c[0]) || !(0.0..=1.0).contains(&c[1]))
            {
                return bad("coordinates outside the unit square".into());
            }
        }
        match &self.data {
            ProblemData::Op(p) if !all_finite(&p.prizes) => bad("OP prizes".into()),
            ProblemData::Pctsp(p) if !all_finite(&p.prizes) || !all_finite(&p.penalties) => {
                bad("PCTSP prizes or penalties".into())
            }
            ProblemData::Smtwtp(p)
                if !all_finite(&p.due) || !all_finite(&p.weight) || !all_finite(&p.processing) =>
            {
                bad("SMTWTP data".into())
            }
            ProblemData::Mkp(p) => {
                for (i, row) in p.weights.iter().enumerate() {
                    let max = row.iter().copied().fold(0.0, f64::max);
                    let sum: f64 = row.iter().sum();
                    let c = p.capacities[i];
                    if !(max < c && c < sum) {
                        return bad(format!("MKP capacity {i} = {c} outside ({max}, {sum})"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
