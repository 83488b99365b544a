use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use colony::aco::AcoConfig;
use colony::learner::{Architecture, GnnConfig, TransformerConfig};
use colony::local_search::LocalSearch;
use colony::problem::{GeneratorOptions, PheromoneModel, ProblemKind};
use colony::train::TrainerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Heuristic source for a colony run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AcoExpert,
    Deepaco,
    DeepacoMultihead,
    DeepacoTopk,
    DeepacoImitation,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::AcoExpert,
        Method::Deepaco,
        Method::DeepacoMultihead,
        Method::DeepacoTopk,
        Method::DeepacoImitation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::AcoExpert => "aco-expert",
            Method::Deepaco => "deepaco",
            Method::DeepacoMultihead => "deepaco-multihead",
            Method::DeepacoTopk => "deepaco-topk",
            Method::DeepacoImitation => "deepaco-imitation",
        }
    }

    pub fn is_neural(self) -> bool {
        self != Method::AcoExpert
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Training overrides; unset fields keep the trainer defaults for the
/// problem and scale.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSettings {
    pub instances: Option<usize>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub rollouts: Option<usize>,
    pub nls_weight: Option<f64>,
    pub local_search: Option<LocalSearch>,
    pub lr: Option<f64>,
    pub seed: Option<u64>,
    pub architecture: Option<Architecture>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    pub alpha: Vec<f64>,
    /// Trail retention factors; the evaporation rate is `1 − decay`.
    pub decay: Vec<f64>,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            alpha: vec![0.5, 1.0, 2.0, 3.0],
            decay: vec![0.8, 0.9, 0.95, 0.99],
        }
    }
}

/// Everything a command needs, loaded from a TOML file and overridden by
/// flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub problem: ProblemKind,
    pub scale: usize,
    pub methods: Vec<Method>,
    /// Objective evaluations per colony run.
    pub budget: usize,
    /// Colony seeds; every instance is solved once per seed.
    pub seeds: Vec<u64>,
    /// Held-out instances generated when no dataset is given.
    pub instances: usize,
    /// Generator seed of the first held-out instance.
    pub instance_seed: u64,
    pub dataset: Option<PathBuf>,
    pub checkpoints: BTreeMap<Method, PathBuf>,
    pub out: PathBuf,
    pub generator: GeneratorOptions,
    /// Colony settings; `budget` and `seed` are taken from the fields above.
    pub aco: AcoConfig,
    pub training: TrainingSettings,
    pub grid: GridSettings,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Tsp,
            scale: 20,
            methods: vec![Method::AcoExpert, Method::Deepaco],
            budget: 4000,
            seeds: vec![0, 1, 2],
            instances: 100,
            instance_seed: 1_000_000,
            dataset: None,
            checkpoints: BTreeMap::new(),
            out: PathBuf::from("out"),
            generator: GeneratorOptions::default(),
            aco: AcoConfig::default(),
            training: TrainingSettings::default(),
            grid: GridSettings::default(),
        }
    }
}

impl RunSpec {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text).map_err(|message| BenchError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(BenchError::Usage(m));
        if self.scale == 0 {
            return usage("scale must be positive".into());
        }
        if self.budget == 0 {
            return usage("budget must be positive".into());
        }
        if self.seeds.is_empty() {
            return usage("at least one seed is required".into());
        }
        if self.methods.is_empty() {
            return usage("at least one method is required".into());
        }
        if self.dataset.is_none() && self.instances == 0 {
            return usage("instance count must be positive".into());
        }
        if !self.problem.supports(self.aco.model) {
            return usage(format!("{} does not support the {:?} pheromone model", self.problem, self.aco.model));
        }
        self.colony_config(self.seeds[0]).validate()?;
        Ok(())
    }

    /// Colony configuration for one seed.
    pub fn colony_config(&self, seed: u64) -> AcoConfig {
        AcoConfig {
            budget: self.budget,
            seed,
            ..self.aco
        }
    }

    /// Trainer configuration producing `method`'s model.
    pub fn trainer_config(&self, method: Method) -> Result<TrainerConfig> {
        if !method.is_neural() {
            return Err(BenchError::Usage(format!("{method} is not trained")));
        }
        let t = &self.training;
        let mut c = TrainerConfig::for_problem(self.problem, self.scale);
        c.generator = self.generator;
        c.architecture = t.architecture.unwrap_or(match self.aco.model {
            PheromoneModel::Successor => Architecture::Gnn(GnnConfig::default()),
            PheromoneModel::Items => Architecture::Transformer(TransformerConfig::default()),
        });
        c.instances = t.instances.unwrap_or(c.instances);
        c.epochs = t.epochs.unwrap_or(c.epochs);
        c.batch_size = t.batch_size.unwrap_or(c.batch_size);
        c.rollouts = t.rollouts.unwrap_or(c.rollouts);
        c.nls_weight = t.nls_weight.unwrap_or(c.nls_weight);
        c.local_search = t.local_search.unwrap_or(c.local_search);
        c.lr = t.lr.unwrap_or(c.lr);
        c.seed = t.seed.unwrap_or(c.seed);
        c.alpha = self.aco.alpha;
        c.beta = self.aco.beta;
        match method {
            Method::DeepacoMultihead => match &mut c.architecture {
                Architecture::Gnn(g) => {
                    g.heads = 4;
                    c.kl_coef = 0.05;
                }
                Architecture::Transformer(_) => {
                    return Err(BenchError::Usage("multi-head decoding needs the GNN architecture".into()))
                }
            },
            Method::DeepacoTopk => {
                c.topk_coef = 0.05;
                c.topk = 5;
            }
            Method::DeepacoImitation => c.imitation_coef = 0.02,
            _ => {}
        }
        c.validate()?;
        Ok(c)
    }
}
