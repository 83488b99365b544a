use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use colony::aco::{mean_curve, pure_sample, run_colony, AcoConfig, EvolutionLog};
use colony::learner::HeuristicModel;
use colony::problem::{ConstructionGraph, Dataset, HeuristicField, Instance};
use colony::train::{Trainer, TrainingLog};
use rayon::prelude::*;

use crate::error::{BenchError, Result};
use crate::spec::{Method, RunSpec};
use crate::stats;

pub const WORKERS_ENV: &str = "COLONY_WORKERS";

pub type Models = BTreeMap<Method, HeuristicModel<f64>>;

/// Worker pool sized by `COLONY_WORKERS` (all cores when unset).
pub fn pool() -> Result<rayon::ThreadPool> {
    let workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| BenchError::Usage(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Usage(e.to_string()))
}

fn parallel<T: Send, U: Send>(items: Vec<T>, f: impl Fn(T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    pool()?.install(|| items.into_par_iter().map(f).collect())
}

/// Writes `contents`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

/// Generated held-out instances.
pub fn generate(spec: &RunSpec) -> Result<Dataset> {
    let seeds: Vec<u64> = (0..spec.instances as u64).map(|i| spec.instance_seed + i).collect();
    Ok(Dataset::generate(spec.problem, spec.scale, &seeds, spec.generator)?)
}

/// The dataset named by the spec, or freshly generated instances.
pub fn instances(spec: &RunSpec) -> Result<Vec<Instance>> {
    let ds = match &spec.dataset {
        Some(path) => {
            let ds = Dataset::load(path)?;
            if ds.kind != spec.problem || ds.n != spec.scale {
                return Err(BenchError::Usage(format!(
                    "dataset {} holds {}{} instances, spec asks for {}{}",
                    path.display(),
                    ds.kind,
                    ds.n,
                    spec.problem,
                    spec.scale
                )));
            }
            ds
        }
        None => generate(spec)?,
    };
    Ok(ds.instances)
}

/// Loads the checkpoint of every neural method in the spec.
pub fn load_models(spec: &RunSpec) -> Result<Models> {
    let mut models = Models::new();
    for &m in spec.methods.iter().filter(|m| m.is_neural()) {
        let path = spec
            .checkpoints
            .get(&m)
            .ok_or_else(|| BenchError::Usage(format!("no checkpoint given for {m}")))?;
        models.insert(m, HeuristicModel::load(path)?);
    }
    Ok(models)
}

/// Heuristic fields (one per decoder head) guiding `method` on `instance`.
pub fn heads(
    spec: &RunSpec,
    method: Method,
    models: &Models,
    instance: &Instance,
    graph: &ConstructionGraph,
) -> Result<Vec<HeuristicField>> {
    if !method.is_neural() {
        return Ok(vec![HeuristicField::expert(instance, graph, spec.aco.model)?]);
    }
    let model = models
        .get(&method)
        .ok_or_else(|| BenchError::Usage(format!("no model loaded for {method}")))?;
    model.check_instance(instance)?;
    if model.model() != spec.aco.model {
        return Err(BenchError::Usage(format!(
            "{method} checkpoint predicts {:?} measures, the colony uses {:?}",
            model.model(),
            spec.aco.model
        )));
    }
    Ok(model.fields(instance, graph)?)
}

/// Budget checkpoints: every `n_ants` evaluations.
pub fn checkpoints(spec: &RunSpec) -> Vec<usize> {
    let step = spec.aco.n_ants.max(1);
    (1..=spec.budget / step).map(|k| k * step).collect()
}

type Prepared = (Method, usize, ConstructionGraph, Vec<HeuristicField>);

/// Fields of every (method, instance) pair, computed once.
fn prepare(spec: &RunSpec, models: &Models, insts: &[Instance]) -> Result<Vec<Prepared>> {
    let jobs: Vec<(Method, usize)> = spec
        .methods
        .iter()
        .flat_map(|&m| (0..insts.len()).map(move |i| (m, i)))
        .collect();
    parallel(jobs, |(m, i)| {
        let graph = ConstructionGraph::sparsify(&insts[i]);
        let h = heads(spec, m, models, &insts[i], &graph)?;
        Ok((m, i, graph, h))
    })
}

#[derive(Clone, Debug)]
pub struct BenchRun {
    pub method: Method,
    pub seed: u64,
    pub instance: usize,
    pub log: EvolutionLog,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub checkpoints: Vec<usize>,
    pub methods: Vec<Method>,
    pub runs: Vec<BenchRun>,
    /// Mean best-so-far per method at each checkpoint, over instances and
    /// seeds.
    pub curves: BTreeMap<Method, Vec<f64>>,
}

impl BenchReport {
    pub fn final_mean(&self, method: Method) -> f64 {
        *self.curves[&method].last().expect("at least one checkpoint")
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("evaluations");
        for m in &self.methods {
            write!(out, ",{m}").expect("write to string");
        }
        out.push('\n');
        for (k, x) in self.checkpoints.iter().enumerate() {
            write!(out, "{x}").expect("write to string");
            for m in &self.methods {
                write!(out, ",{}", self.curves[m][k]).expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    /// One evolution CSV per run plus `summary.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        for r in &self.runs {
            let path = dir
                .join(r.method.name())
                .join(format!("seed{}", r.seed))
                .join(format!("instance{:04}.csv", r.instance));
            write_file(&path, &r.log.to_csv())?;
        }
        write_file(&dir.join("summary.csv"), &self.summary_csv())
    }
}

/// Every method on every instance and seed, with mean evolution curves.
pub fn bench(spec: &RunSpec, models: &Models) -> Result<BenchReport> {
    spec.validate()?;
    let insts = instances(spec)?;
    let prepared = prepare(spec, models, &insts)?;
    let jobs: Vec<(usize, u64)> = (0..prepared.len())
        .flat_map(|p| spec.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let runs = parallel(jobs, |(p, seed)| {
        let (method, i, graph, h) = &prepared[p];
        let log = run_colony(&insts[*i], graph, h, &spec.colony_config(seed))?;
        Ok(BenchRun {
            method: *method,
            seed,
            instance: *i,
            log,
        })
    })?;
    let points = checkpoints(spec);
    let curves = spec
        .methods
        .iter()
        .map(|&m| {
            let logs: Vec<EvolutionLog> = runs.iter().filter(|r| r.method == m).map(|r| r.log.clone()).collect();
            (m, mean_curve(&logs, &points))
        })
        .collect();
    Ok(BenchReport {
        checkpoints: points,
        methods: spec.methods.clone(),
        runs,
        curves,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRow {
    pub method: Method,
    pub alpha: f64,
    /// Trail retention per iteration, `1 − ρ`.
    pub decay: f64,
    /// Final best-so-far, averaged over instances and seeds.
    pub mean_final: f64,
}

#[derive(Clone, Debug)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    /// Sample variance of `mean_final` across the grid, per method.
    pub variance: BTreeMap<Method, f64>,
}

impl GridReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,alpha,decay,mean_final\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.method, r.alpha, r.decay, r.mean_final).expect("write to string");
        }
        out
    }

    pub fn variance_csv(&self) -> String {
        let mut out = String::from("method,variance\n");
        for (m, v) in &self.variance {
            writeln!(out, "{m},{v}").expect("write to string");
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join("grid.csv"), &self.to_csv())?;
        write_file(&dir.join("grid_variance.csv"), &self.variance_csv())
    }
}

/// Final objective over the (alpha, decay) grid for every method.
pub fn grid(spec: &RunSpec, models: &Models) -> Result<GridReport> {
    spec.validate()?;
    let insts = instances(spec)?;
    let prepared = prepare(spec, models, &insts)?;
    let mut cells = Vec::new();
    for &m in &spec.methods {
        for &alpha in &spec.grid.alpha {
            for &decay in &spec.grid.decay {
                cells.push((m, alpha, decay));
            }
        }
    }
    for &(_, _, decay) in &cells {
        AcoConfig {
            decay: 1.0 - decay,
            ..spec.colony_config(0)
        }
        .validate()?;
    }
    let mut jobs = Vec::new();
    for c in 0..cells.len() {
        for p in (0..prepared.len()).filter(|&p| prepared[p].0 == cells[c].0) {
            for &s in &spec.seeds {
                jobs.push((c, p, s));
            }
        }
    }
    let finals = parallel(jobs.clone(), |(c, p, seed)| {
        let (_, alpha, decay) = cells[c];
        let (_, i, graph, h) = &prepared[p];
        let cfg = AcoConfig {
            alpha,
            decay: 1.0 - decay,
            ..spec.colony_config(seed)
        };
        Ok(run_colony(&insts[*i], graph, h, &cfg)?.best_objective)
    })?;
    let rows: Vec<GridRow> = cells
        .iter()
        .enumerate()
        .map(|(c, &(method, alpha, decay))| {
            let vals: Vec<f64> = jobs
                .iter()
                .zip(&finals)
                .filter(|(j, _)| j.0 == c)
                .map(|(_, &v)| v)
                .collect();
            GridRow {
                method,
                alpha,
                decay,
                mean_final: stats::mean(&vals),
            }
        })
        .collect();
    let variance = spec
        .methods
        .iter()
        .map(|&m| {
            let v: Vec<f64> = rows.iter().filter(|r| r.method == m).map(|r| r.mean_final).collect();
            (m, stats::variance(&v))
        })
        .collect();
    Ok(GridReport { rows, variance })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairRow {
    pub instance: usize,
    pub evaluations: usize,
    /// Final best under pheromone evolution, averaged over seeds.
    pub evolution: f64,
    /// Final best under pure sampling, averaged over seeds.
    pub sampling: f64,
}

#[derive(Clone, Debug)]
pub struct SamplingReport {
    pub method: Method,
    pub rows: Vec<PairRow>,
}

impl SamplingReport {
    pub fn evolution(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.evolution).collect()
    }

    pub fn sampling(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sampling).collect()
    }

    /// One-sided paired p-value of evolution beating sampling.
    pub fn p_value(&self) -> f64 {
        stats::paired_t_less(&self.evolution(), &self.sampling())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance,evaluations,evolution,sampling\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.instance, r.evaluations, r.evolution, r.sampling).expect("write to string");
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join("sampling_compare.csv"), &self.to_csv())
    }
}

/// Paired evolution against pure sampling at equal budget for the spec's
/// first method.
pub fn sampling_compare(spec: &RunSpec, models: &Models) -> Result<SamplingReport> {
    spec.validate()?;
    let method = spec.methods[0];
    let single = RunSpec {
        methods: vec![method],
        ..spec.clone()
    };
    let insts = instances(&single)?;
    let prepared = prepare(&single, models, &insts)?;
    let rows = parallel((0..prepared.len()).collect(), |p| {
        let (_, i, graph, h) = &prepared[p];
        let (mut evo, mut samp, mut evals) = (Vec::new(), Vec::new(), None);
        for &seed in &spec.seeds {
            let cfg = spec.colony_config(seed);
            let a = run_colony(&insts[*i], graph, h, &cfg)?;
            let b = pure_sample(&insts[*i], graph, h, &cfg)?;
            if a.evaluations() != b.evaluations() || evals.is_some_and(|e| e != a.evaluations()) {
                return Err(BenchError::Usage("evaluation budgets differ between runs".into()));
            }
            evals = Some(a.evaluations());
            evo.push(a.best_objective);
            samp.push(b.best_objective);
        }
        Ok(PairRow {
            instance: *i,
            evaluations: evals.expect("at least one seed"),
            evolution: stats::mean(&evo),
            sampling: stats::mean(&samp),
        })
    })?;
    Ok(SamplingReport { method, rows })
}

/// Colony run of the spec's first method on one instance and seed.
pub fn solve(spec: &RunSpec, models: &Models, instance: &Instance, seed: u64) -> Result<EvolutionLog> {
    spec.validate()?;
    let graph = ConstructionGraph::sparsify(instance);
    let h = heads(spec, spec.methods[0], models, instance, &graph)?;
    Ok(run_colony(instance, &graph, &h, &spec.colony_config(seed))?)
}

/// Trains `method`'s model.
pub fn train(spec: &RunSpec, method: Method) -> Result<(HeuristicModel<f64>, TrainingLog)> {
    let mut trainer = Trainer::<f64>::new(spec.trainer_config(method)?)?;
    let log = trainer.train()?;
    Ok((trainer.model, log))
}
