use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use colony::problem::{Instance, ProblemKind};

use crate::error::{BenchError, Result};
use crate::experiments::{self, write_file};
use crate::spec::{Method, RunSpec};

#[derive(Debug, Parser)]
#[command(name = "colony", version, about = "Neural-guided ant colony optimization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a held-out dataset.
    Generate(Flags),
    /// Train the heuristic learner of every neural method.
    Train(Flags),
    /// Solve one instance and print the best solution.
    Solve(Flags),
    /// Evolution curves of every method on the held-out set.
    Bench(Flags),
    /// Final objective over the alpha/decay grid.
    Grid(Flags),
    /// Pheromone evolution against pure sampling at equal budget.
    SamplingCompare(Flags),
}

/// Overrides applied on top of `--config`.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// TOML run specification.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub problem: Option<ProblemKind>,
    #[arg(long)]
    pub scale: Option<usize>,
    /// Method(s) to run; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<Method>,
    /// Objective evaluations per colony run.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Colony seeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Held-out instance count.
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// `METHOD=PATH`, or a bare path used for every neural method.
    #[arg(long)]
    pub checkpoint: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Flags {
    pub fn resolve(&self) -> Result<RunSpec> {
        let mut spec = match &self.config {
            Some(path) => RunSpec::load(path)?,
            None => RunSpec::default(),
        };
        if let Some(p) = self.problem {
            spec.problem = p;
        }
        if let Some(s) = self.scale {
            spec.scale = s;
        }
        if !self.method.is_empty() {
            spec.methods = self.method.clone();
        }
        if let Some(b) = self.budget {
            spec.budget = b;
        }
        if !self.seeds.is_empty() {
            spec.seeds = self.seeds.clone();
        }
        if let Some(n) = self.instances {
            spec.instances = n;
        }
        if let Some(d) = &self.dataset {
            spec.dataset = Some(d.clone());
        }
        if let Some(o) = &self.out {
            spec.out = o.clone();
        }
        for c in &self.checkpoint {
            match c.split_once('=') {
                Some((m, path)) => {
                    let m: Method = m.parse().map_err(BenchError::Usage)?;
                    spec.checkpoints.insert(m, PathBuf::from(path));
                }
                None => {
                    for &m in spec.methods.iter().filter(|m| m.is_neural()) {
                        spec.checkpoints.insert(m, PathBuf::from(c));
                    }
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

pub fn checkpoint_path(spec: &RunSpec, method: Method) -> PathBuf {
    spec.out.join(format!("{}.ckpt.json", method.name()))
}

pub fn run(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut say = |line: String| writeln!(out, "{line}").map_err(|e| BenchError::io("<stdout>", e));
    match cli.command {
        Command::Generate(f) => {
            let spec = f.resolve()?;
            let ds = experiments::generate(&spec)?;
            let path = spec.out.join("dataset.json");
            write_file(&path, &ds.to_json()?)?;
            say(format!("wrote {} instances to {}", ds.len(), path.display()))?;
        }
        Command::Train(f) => {
            let spec = f.resolve()?;
            let neural: Vec<Method> = spec.methods.iter().copied().filter(|m| m.is_neural()).collect();
            if neural.is_empty() {
                return Err(BenchError::Usage("no neural method to train".into()));
            }
            for m in neural {
                let (model, log) = experiments::train(&spec, m)?;
                let path = checkpoint_path(&spec, m);
                std::fs::create_dir_all(&spec.out).map_err(|e| BenchError::io(&spec.out, e))?;
                model.save(&path)?;
                write_file(&spec.out.join(format!("{}_training.csv", m.name())), &log.to_csv())?;
                let last = log.epochs.last().map_or(f64::NAN, |e| e.mean_f);
                say(format!("{m}: final epoch mean objective {last}, checkpoint {}", path.display()))?;
            }
        }
        Command::Solve(f) => {
            let spec = f.resolve()?;
            let models = experiments::load_models(&spec)?;
            let instance = match &spec.dataset {
                Some(_) => experiments::instances(&spec)?.swap_remove(0),
                None => Instance::generate_with(spec.problem, spec.scale, spec.instance_seed, spec.generator)?,
            };
            let log = experiments::solve(&spec, &models, &instance, spec.seeds[0])?;
            write_file(&spec.out.join("solve.csv"), &log.to_csv())?;
            say(format!("best objective {}", log.best_objective))?;
            say(format!("solution {:?}", log.best_solution))?;
        }
        Command::Bench(f) => {
            let spec = f.resolve()?;
            let models = experiments::load_models(&spec)?;
            let report = experiments::bench(&spec, &models)?;
            report.write(&spec.out)?;
            for &m in &report.methods {
                say(format!("{m}: final mean best {}", report.final_mean(m)))?;
            }
        }
        Command::Grid(f) => {
            let spec = f.resolve()?;
            let models = experiments::load_models(&spec)?;
            let report = experiments::grid(&spec, &models)?;
            report.write(&spec.out)?;
            for (m, v) in &report.variance {
                say(format!("{m}: grid variance {v}"))?;
            }
        }
        Command::SamplingCompare(f) => {
            let spec = f.resolve()?;
            let models = experiments::load_models(&spec)?;
            let report = experiments::sampling_compare(&spec, &models)?;
            report.write(&spec.out)?;
            say(format!(
                "{}: evolution {} sampling {} (p = {})",
                report.method,
                crate::stats::mean(&report.evolution()),
                crate::stats::mean(&report.sampling()),
                report.p_value()
            ))?;
        }
    }
    Ok(())
}
