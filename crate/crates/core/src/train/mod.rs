//! Policy-gradient training of heuristic learners with fixed pheromones,
//! plus the diversity, top-k entropy and imitation regularizers.

mod losses;

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use losses::{loss_imitation, loss_kl, loss_topk_entropy, Rows};

use crate::aco::{PheromoneField, Sampler, Trajectory};
use crate::autodiff::{CategoricalEvents, Tape, Var};
use crate::error::{Error, Result};
use crate::learner::{Architecture, GnnConfig, HeuristicModel, ModelSpec};
use crate::local_search::{LocalSearch, LocalSearchContext, NlsConfig};
use crate::problem::{
    default_sparsity, objective, ConstructionGraph, GeneratorOptions, HeuristicField, Instance, PheromoneModel,
    ProblemKind, Provenance, EPS_ETA,
};
use crate::scalar::Scalar;

/// Training instances used by default for a problem and size.
pub fn default_training_instances(kind: ProblemKind, n: usize) -> usize {
    match kind {
        ProblemKind::Op => 320,
        ProblemKind::Pctsp if n < 500 => 320,
        _ => 640,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    pub kind: ProblemKind,
    pub size: usize,
    pub architecture: Architecture,
    /// Training instances over the whole run.
    pub instances: usize,
    pub epochs: usize,
    /// Instances whose gradients are averaged per optimizer step.
    pub batch_size: usize,
    /// Rollouts per instance and head.
    pub rollouts: usize,
    /// Weight W of the local-search term; 0 disables local search.
    pub nls_weight: f64,
    /// Local search producing the refined objective when `nls_weight > 0`.
    pub local_search: LocalSearch,
    pub kl_coef: f64,
    pub topk_coef: f64,
    pub imitation_coef: f64,
    pub topk: usize,
    pub lr: f64,
    /// Joint gradient norm cap applied before each step; `None` disables it.
    pub grad_clip: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub generator: GeneratorOptions,
    /// Neighbor count for sparsification; `None` uses the default.
    pub sparsity: Option<usize>,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Tsp,
            size: 20,
            architecture: Architecture::Gnn(GnnConfig::default()),
            instances: 640,
            epochs: 10,
            batch_size: 1,
            rollouts: 20,
            nls_weight: 0.0,
            local_search: LocalSearch::Nls(NlsConfig::default()),
            kl_coef: 0.0,
            topk_coef: 0.0,
            imitation_coef: 0.0,
            topk: 5,
            lr: 1e-3,
            grad_clip: Some(3.0),
            alpha: 1.0,
            beta: 1.0,
            seed: 0,
            generator: GeneratorOptions::default(),
            sparsity: None,
        }
    }
}

impl TrainerConfig {
    pub fn for_problem(kind: ProblemKind, size: usize) -> Self {
        Self {
            kind,
            size,
            instances: default_training_instances(kind, size),
            ..Self::default()
        }
    }

    pub fn heads(&self) -> usize {
        self.architecture.heads()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.epochs == 0 || self.instances < self.epochs {
            return bad(format!("{} instances cannot fill {} epochs", self.instances, self.epochs));
        }
        if self.batch_size == 0 {
            return bad("batch size must be >= 1".into());
        }
        if self.rollouts < 2 {
            return bad("mean baselines need at least two rollouts per instance".into());
        }
        let coefs = [self.nls_weight, self.kl_coef, self.topk_coef, self.imitation_coef];
        if coefs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return bad("loss weights must be finite and nonnegative".into());
        }
        if self.topk == 0 {
            return bad("top-k needs k >= 1".into());
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate {} must be nonnegative", self.lr));
        }
        if self.grad_clip.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
            return bad("gradient clip must be positive".into());
        }
        if self.nls_weight > 0.0 && self.local_search.is_none() {
            return bad("a positive local-search weight needs a local search mode".into());
        }
        if !self.kind.supports(self.architecture.model()) {
            return Err(Error::Unsupported {
                kind: self.kind,
                what: "the item pheromone model",
            });
        }
        match self.architecture {
            Architecture::Gnn(c) => c.validate(),
            Architecture::Transformer(c) => c.validate(),
        }
    }

    fn graph(&self, instance: &Instance) -> ConstructionGraph {
        let k = self.sparsity.unwrap_or_else(|| default_sparsity(instance.kind(), instance.size()));
        ConstructionGraph::sparsify_with(instance, k)
    }
}

/// Per-instance mean baselines of one rollout batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchStats {
    pub rollouts: usize,
    pub baseline: f64,
    /// Mean refined objective, when every rollout was refined.
    pub baseline_nls: Option<f64>,
}

impl BatchStats {
    pub fn new(trajectories: &[Trajectory]) -> Result<Self> {
        let r = trajectories.len();
        if r < 2 {
            return Err(Error::InvalidArgument(format!(
                "baselines need at least two rollouts, got {r}"
            )));
        }
        let baseline = trajectories.iter().map(|t| t.objective).sum::<f64>() / r as f64;
        let baseline_nls = trajectories
            .iter()
            .map(|t| t.refined.as_ref().map(|(_, f)| *f))
            .sum::<Option<f64>>()
            .map(|s| s / r as f64);
        if !baseline.is_finite() || baseline_nls.is_some_and(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("non-finite rollout objective".into()));
        }
        Ok(Self {
            rollouts: r,
            baseline,
            baseline_nls,
        })
    }

    /// `(f − b) + W (f_NLS − b_NLS)` for one rollout.
    pub fn advantage(&self, t: &Trajectory, nls_weight: f64) -> Result<f64> {
        let mut a = t.objective - self.baseline;
        if nls_weight > 0.0 {
            let (b, f) = match (self.baseline_nls, &t.refined) {
                (Some(b), Some((_, f))) => (b, *f),
                _ => {
                    return Err(Error::InvalidArgument(
                        "local-search weight is positive but rollouts were not refined".into(),
                    ))
                }
            };
            a += nls_weight * (f - b);
        }
        Ok(a)
    }
}

/// Local search applied to rollouts for the refined objective.
#[derive(Clone, Copy)]
pub struct Refine<'a> {
    pub context: &'a LocalSearchContext,
    pub mode: &'a LocalSearch,
    pub head: usize,
}

/// `n_rollouts` independent constructions under `η` with `τ ≡ 1`, each
/// recording its choices; refined by `refine` when given. Rollout `r` uses
/// stream `r` of a generator seeded with `seed`.
#[allow(clippy::too_many_arguments)]
pub fn rollout_batch(
    instance: &Instance,
    graph: &ConstructionGraph,
    eta: &HeuristicField,
    n_rollouts: usize,
    alpha: f64,
    beta: f64,
    refine: Option<Refine<'_>>,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    let tau = PheromoneField::new(instance, eta.model(), 1.0)?;
    let sampler = Sampler::new(instance, graph, &tau, eta, alpha, beta)?;
    (0..n_rollouts)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut t = sampler.construct(&mut rng, true)?;
            if let Some(rf) = refine {
                t.head = rf.head;
                let (s, _) = rf.context.improve(rf.mode, &t.solution, rf.head, &mut rng)?;
                let f = objective(instance, &s)?;
                t.refined = Some((s, f));
            }
            Ok(t)
        })
        .collect()
}

/// Surrogate scalar `mean_r [(f_r − b) + W (f_NLS,r − b_NLS)] log P_r`
/// whose gradient is the REINFORCE estimate of the expected-objective
/// gradient (descending it lowers the expected objective), with `log P`
/// replayed from the recorded choices against the measure column
/// `weights` (entries `η + ε`, raised to `beta`).
pub fn policy_gradient<S: Scalar>(
    tape: &mut Tape<S>,
    weights: Var,
    trajectories: &[Trajectory],
    stats: &BatchStats,
    nls_weight: f64,
    beta: f64,
) -> Result<Var> {
    if stats.rollouts != trajectories.len() {
        return Err(Error::InvalidArgument(format!(
            "batch statistics cover {} rollouts, got {}",
            stats.rollouts,
            trajectories.len()
        )));
    }
    let mut events = CategoricalEvents::new();
    let mut coef = Vec::with_capacity(trajectories.len());
    let r = trajectories.len() as f64;
    for t in trajectories {
        let choices = t
            .choices
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("trajectory was sampled without recording".into()))?;
        events.begin_group();
        for k in 0..choices.len() {
            let (chosen, cands) = choices.step(k);
            events.push(chosen, cands);
        }
        coef.push(S::of(stats.advantage(t, nls_weight)? / r));
    }
    tape.categorical_log_prob(weights, Arc::new(events), coef, S::of(beta))
}

/// One row of the training log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean constructed objective over the epoch's rollouts.
    pub mean_f: f64,
    /// Mean refined objective (NaN when local search is off).
    pub mean_f_nls: f64,
    /// Mean total loss per instance.
    pub loss: f64,
    /// Wall-clock seconds spent in the epoch.
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mean_f,mean_f_nls,loss,seconds\n");
        for e in &self.epochs {
            writeln!(out, "{},{},{},{},{}", e.epoch, e.mean_f, e.mean_f_nls, e.loss, e.seconds)
                .expect("write to string");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Statistics of one instance's training contribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceStats {
    pub mean_f: f64,
    pub mean_f_nls: f64,
    pub loss: f64,
}

/// Training state: the model and the run configuration.
pub struct Trainer<S: Scalar = f64> {
    pub config: TrainerConfig,
    pub model: HeuristicModel<S>,
}

impl<S: Scalar> Trainer<S> {
    /// Fresh model sized for the configured problem.
    pub fn new(config: TrainerConfig) -> Result<Self> {
        config.validate()?;
        let probe = Instance::generate_with(config.kind, config.size, config.seed, config.generator)?;
        let spec = ModelSpec::for_instance(&probe, config.architecture, config.seed)?;
        let model = HeuristicModel::new(spec)?;
        Ok(Self { config, model })
    }

    pub fn with_model(config: TrainerConfig, model: HeuristicModel<S>) -> Result<Self> {
        config.validate()?;
        if model.spec().architecture != config.architecture || model.spec().kind != config.kind {
            return Err(Error::InvalidArgument("model does not match the training configuration".into()));
        }
        Ok(Self { config, model })
    }

    /// Total loss for one instance, recorded on `tape`, with rollout
    /// statistics. Gradients are not touched.
    pub fn instance_loss(&self, tape: &mut Tape<S>, instance: &Instance, seed: u64) -> Result<(Var, InstanceStats)> {
        let cfg = &self.config;
        let graph = cfg.graph(instance);
        let heads = self.model.forward(tape, instance, &graph)?;
        let model = self.model.model();
        let fields = heads
            .iter()
            .map(|&v| HeuristicField::new(model, tape.value(v).to_f64(), Provenance::Learned))
            .collect::<Result<Vec<_>>>()?;
        let context = if cfg.nls_weight > 0.0 {
            Some(LocalSearchContext::new(instance, &graph, &fields)?)
        } else {
            None
        };
        let mut terms = Vec::new();
        let (mut sum_f, mut sum_nls, mut count) = (0.0, 0.0, 0usize);
        for (k, (&head, field)) in heads.iter().zip(&fields).enumerate() {
            let refine = context.as_ref().map(|c| Refine {
                context: c,
                mode: &cfg.local_search,
                head: k,
            });
            let stream_seed = seed.wrapping_add(k as u64);
            let trajs = rollout_batch(instance, &graph, field, cfg.rollouts, cfg.alpha, cfg.beta, refine, stream_seed)?;
            let stats = BatchStats::new(&trajs)?;
            sum_f += stats.baseline * trajs.len() as f64;
            sum_nls += stats.baseline_nls.unwrap_or(f64::NAN) * trajs.len() as f64;
            count += trajs.len();
            let weights = tape.add_scalar(head, S::of(EPS_ETA))?;
            terms.push(policy_gradient(tape, weights, &trajs, &stats, cfg.nls_weight, cfg.beta)?);
        }
        let rows = match model {
            PheromoneModel::Successor => Rows::of_graph(&graph),
            PheromoneModel::Items => Rows::single(instance.size()),
        };
        let m = S::of(heads.len() as f64);
        if cfg.kl_coef > 0.0 && heads.len() >= 2 {
            let kl = loss_kl(tape, &heads, &rows)?;
            terms.push(tape.scale(kl, S::of(cfg.kl_coef))?);
        }
        if cfg.topk_coef > 0.0 {
            for &h in &heads {
                let e = loss_topk_entropy(tape, h, &rows, cfg.topk)?;
                terms.push(tape.scale(e, S::of(cfg.topk_coef) / m)?);
            }
        }
        if cfg.imitation_coef > 0.0 {
            let expert = HeuristicField::expert(instance, &graph, model)?;
            for &h in &heads {
                let i = loss_imitation(tape, h, expert.values(), &rows)?;
                terms.push(tape.scale(i, S::of(cfg.imitation_coef) / m)?);
            }
        }
        let mut total = terms[0];
        for &t in &terms[1..] {
            total = tape.add(total, t)?;
        }
        let loss = tape.value(total).data()[0].as_f64();
        Ok((
            total,
            InstanceStats {
                mean_f: sum_f / count as f64,
                mean_f_nls: sum_nls / count as f64,
                loss,
            },
        ))
    }

    /// Accumulates gradients over `instances` (averaged) and applies one
    /// optimizer step unless the learning rate is zero.
    pub fn step(&mut self, instances: &[(Instance, u64)]) -> Result<Vec<InstanceStats>> {
        let mut out = Vec::with_capacity(instances.len());
        for (instance, seed) in instances {
            let mut tape = Tape::new();
            let (loss, stats) = self.instance_loss(&mut tape, instance, *seed)?;
            tape.backward(loss, self.model.store_mut())?;
            out.push(stats);
        }
        let store = self.model.store_mut();
        if self.config.lr > 0.0 {
            store.scale_grad(S::one() / S::of(instances.len().max(1) as f64));
            if let Some(c) = self.config.grad_clip {
                store.clip_grad_norm(S::of(c));
            }
            store.adam_step(S::of(self.config.lr))?;
        } else {
            store.zero_grad();
        }
        Ok(out)
    }

    /// Runs all epochs on freshly generated instances.
    pub fn train(&mut self) -> Result<TrainingLog> {
        let cfg = self.config.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let per_epoch = cfg.instances / cfg.epochs;
        let mut log = TrainingLog::default();
        for epoch in 0..cfg.epochs {
            let started = Instant::now();
            let mut stats = Vec::with_capacity(per_epoch);
            let mut done = 0;
            while done < per_epoch {
                let take = cfg.batch_size.min(per_epoch - done);
                let batch = (0..take)
                    .map(|_| {
                        let inst = Instance::generate_with(cfg.kind, cfg.size, rng.gen(), cfg.generator)?;
                        Ok((inst, rng.gen()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let s = self.step(&batch).map_err(|e| {
                    if is_non_finite(&e) {
                        Error::Diverged { epoch }
                    } else {
                        e
                    }
                })?;
                if s.iter().any(|x| !x.loss.is_finite()) {
                    return Err(Error::Diverged { epoch });
                }
                stats.extend(s);
                done += take;
            }
            let n = stats.len() as f64;
            log.epochs.push(EpochRecord {
                epoch,
                mean_f: stats.iter().map(|s| s.mean_f).sum::<f64>() / n,
                mean_f_nls: stats.iter().map(|s| s.mean_f_nls).sum::<f64>() / n,
                loss: stats.iter().map(|s| s.loss).sum::<f64>() / n,
                seconds: started.elapsed().as_secs_f64(),
            });
        }
        Ok(log)
    }
}

fn is_non_finite(e: &Error) -> bool {
    match e {
        Error::NonFinite { .. } | Error::NonFiniteGrad { .. } => true,
        Error::Layer { source, .. } => is_non_finite(source),
        _ => false,
    }
}

/// Trains a fresh model under `config`.
pub fn train(config: TrainerConfig) -> Result<(HeuristicModel<f64>, TrainingLog)> {
    let mut trainer = Trainer::<f64>::new(config)?;
    let log = trainer.train()?;
    Ok((trainer.model, log))
}
