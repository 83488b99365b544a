mod common;

use colony::aco::Trajectory;
use colony::autodiff::{Tape, Tensor, Var};
use colony::learner::{Architecture, GnnConfig};
use colony::local_search::{LocalSearch, NlsConfig};
use colony::problem::{
    ConstructionGraph, HeuristicField, Instance, PheromoneModel, ProblemKind, Provenance, EPS_ETA,
};
use colony::train::{
    loss_imitation, loss_kl, loss_topk_entropy, policy_gradient, rollout_batch, train, BatchStats, Rows,
    Trainer, TrainerConfig,
};
use colony::Error;
use common::{fd_ratio, rng};
use rand::Rng;

fn column(v: &[f64]) -> Tensor<f64> {
    Tensor::column(v.to_vec())
}

fn scalar(tape: &Tape<f64>, v: Var) -> f64 {
    tape.value(v).data()[0]
}

/// Row-normalizes with the additive floor used by the losses.
fn floor_norm(row: &[f64]) -> Vec<f64> {
    let s: f64 = row.iter().map(|v| v + EPS_ETA).sum();
    row.iter().map(|v| (v + EPS_ETA) / s).collect()
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * (a / b).ln()).sum()
}

fn kl_loss(heads: &[&[f64]], rows: &Rows) -> f64 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = heads.iter().map(|h| tape.leaf(column(h)).unwrap()).collect();
    let l = loss_kl(&mut tape, &vars, rows).unwrap();
    scalar(&tape, l)
}

#[test]
fn kl_of_two_heads_matches_hand_computation() {
    let (a, b) = ([0.9, 0.1], [0.5, 0.5]);
    let v = kl_loss(&[&a, &b], &Rows::single(2));
    let (pa, pb) = (floor_norm(&a), floor_norm(&b));
    let oracle = -(kl(&pa, &pb) + kl(&pb, &pa)) / 4.0;
    assert!((v - oracle).abs() < 1e-9);
    assert!((v - -0.2197).abs() < 1e-4);
}

#[test]
fn kl_vanishes_for_identical_heads() {
    let h = [0.2, 0.7, 0.4, 0.9, 0.1];
    let rows = Rows::new(vec![0, 0, 1, 1, 1], 2).unwrap();
    assert!(kl_loss(&[&h, &h, &h], &rows).abs() < 1e-12);
}

#[test]
fn kl_is_invariant_to_row_scaling() {
    let a = [0.2, 0.7, 0.4, 0.9, 0.1];
    let b = [0.5, 0.1, 0.3, 0.3, 0.8];
    let rows = Rows::new(vec![0, 0, 1, 1, 1], 2).unwrap();
    let mut scaled = a;
    for v in &mut scaled[..2] {
        *v *= 3.0;
    }
    let (x, y) = (kl_loss(&[&a, &b], &rows), kl_loss(&[&scaled, &b], &rows));
    assert!(x < 0.0);
    assert!((x - y).abs() < 1e-9);
}

#[test]
fn kl_needs_two_heads() {
    let mut tape = Tape::new();
    let h = tape.leaf(column(&[0.5, 0.5])).unwrap();
    assert!(matches!(loss_kl(&mut tape, &[h], &Rows::single(2)), Err(Error::InvalidArgument(_))));
}

fn topk(field: &[f64], rows: &Rows, k: usize) -> f64 {
    let mut tape = Tape::new();
    let f = tape.leaf(column(field)).unwrap();
    let l = loss_topk_entropy(&mut tape, f, rows, k).unwrap();
    scalar(&tape, l)
}

#[test]
#[allow(clippy::approx_constant)]
fn topk_entropy_of_uniform_rows_is_minus_log_k() {
    let rows = Rows::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
    let v = topk(&[0.4, 0.4, 0.1, 0.7, 0.2, 0.7], &rows, 2);
    assert!((v - -(2.0f64).ln()).abs() < 1e-9);
    assert!((v - -0.6931).abs() < 1e-4);
}

#[test]
fn topk_entropy_of_a_partial_row() {
    let v = topk(&[0.5, 0.3, 0.2], &Rows::single(3), 2);
    let p = floor_norm(&[0.5, 0.3]);
    let oracle: f64 = p.iter().map(|x| x * x.ln()).sum();
    assert!((v - oracle).abs() < 1e-9);
    assert!((v - -0.6616).abs() < 1e-4);
}

#[test]
fn topk_entropy_of_one_hot_is_near_zero() {
    let v = topk(&[1.0, 0.0, 0.0], &Rows::single(3), 2);
    assert!(v <= 0.0 && v > -1e-8);
}

#[test]
fn topk_uses_the_whole_row_when_short() {
    let v = topk(&[0.3, 0.3], &Rows::single(2), 5);
    assert!((v - -(2.0f64).ln()).abs() < 1e-9);
    let mut tape = Tape::new();
    let f = tape.leaf(column(&[0.3, 0.3])).unwrap();
    assert!(loss_topk_entropy(&mut tape, f, &Rows::single(2), 0).is_err());
}

fn imitation(field: &[f64], expert: &[f64], rows: &Rows) -> f64 {
    let mut tape = Tape::new();
    let f = tape.leaf(column(field)).unwrap();
    let l = loss_imitation(&mut tape, f, expert, rows).unwrap();
    scalar(&tape, l)
}

#[test]
fn imitation_against_a_one_hot_expert() {
    let v = imitation(&[0.5, 0.5], &[1.0, 0.0], &Rows::single(2));
    let oracle = kl(&floor_norm(&[1.0, 0.0]), &floor_norm(&[0.5, 0.5]));
    assert!((v - oracle).abs() < 1e-9);
    assert!((v - (2.0f64).ln()).abs() < 1e-6);
}

#[test]
fn imitation_vanishes_for_proportional_fields() {
    let rows = Rows::new(vec![0, 0, 0, 1, 1], 2).unwrap();
    let expert = [0.2, 0.5, 0.3, 1.0, 4.0];
    let field = [0.1, 0.25, 0.15, 0.05, 0.2];
    assert!(imitation(&field, &expert, &rows).abs() < 1e-9);
}

#[test]
fn imitation_decreases_along_its_gradient() {
    let expert = [0.7, 0.2, 0.1];
    let x0 = column(&[0.2, 0.5, 0.3]);
    let eval = |x: &Tensor<f64>| {
        let mut tape = Tape::new();
        let v = tape.leaf(x.clone()).unwrap();
        let l = loss_imitation(&mut tape, v, &expert, &Rows::single(3)).unwrap();
        let g = tape.gradients(l).unwrap().get(v).unwrap().clone();
        (scalar(&tape, l), g)
    };
    let (before, g) = eval(&x0);
    let stepped = Tensor::column(x0.data().iter().zip(g.data()).map(|(x, g)| x - 0.01 * g).collect());
    let (after, _) = eval(&stepped);
    assert!(after < before);
}

#[test]
fn losses_reject_mismatched_shapes() {
    let mut tape = Tape::new();
    let f = tape.leaf(column(&[0.1, 0.2, 0.3])).unwrap();
    assert!(matches!(
        loss_imitation(&mut tape, f, &[1.0, 2.0], &Rows::single(3)),
        Err(Error::Shape { .. })
    ));
    assert!(matches!(loss_topk_entropy(&mut tape, f, &Rows::single(2), 1), Err(Error::Shape { .. })));
    assert!(Rows::new(vec![0, 3], 2).is_err());
}

#[test]
fn loss_gradients_match_finite_differences() {
    let rows = Rows::new(vec![0, 0, 0, 1, 1, 1, 1], 2).unwrap();
    let x = common::random_tensor(&mut rng(3), 7, 1, 0.1, 1.0);
    let other = common::random_tensor(&mut rng(4), 7, 1, 0.1, 1.0);
    let expert: Vec<f64> = common::random_tensor(&mut rng(5), 7, 1, 0.0, 1.0).into_data();
    let r = rows.clone();
    assert!(fd_ratio(&x, move |t, v| {
        let o = t.constant(other.clone())?;
        loss_kl(t, &[v, o], &r)
    }) <= 1.0);
    let r = rows.clone();
    assert!(fd_ratio(&x, move |t, v| loss_topk_entropy(t, v, &r, 3)) <= 1.0);
    assert!(fd_ratio(&x, move |t, v| loss_imitation(t, v, &expert, &rows)) <= 1.0);
}

struct Setup {
    inst: Instance,
    graph: ConstructionGraph,
    eta: Vec<f64>,
}

fn setup(kind: ProblemKind, n: usize, seed: u64) -> Setup {
    let inst = Instance::generate(kind, n, seed).unwrap();
    let graph = ConstructionGraph::sparsify(&inst);
    let mut r = rng(seed);
    let eta = (0..graph.edge_count()).map(|_| r.gen_range(0.05..1.0)).collect();
    Setup { inst, graph, eta }
}

fn rollouts(s: &Setup, eta: &[f64], n: usize, seed: u64) -> Vec<Trajectory> {
    let field = HeuristicField::new(PheromoneModel::Successor, eta.to_vec(), Provenance::Learned).unwrap();
    rollout_batch(&s.inst, &s.graph, &field, n, 1.0, 1.0, None, seed).unwrap()
}

/// Gradient of the surrogate with respect to the measure column.
fn surrogate_grad(eta: &[f64], trajs: &[Trajectory], nls_weight: f64) -> (f64, Vec<f64>) {
    let stats = BatchStats::new(trajs).unwrap();
    let mut tape = Tape::new();
    let v = tape.leaf(column(eta)).unwrap();
    let w = tape.add_scalar(v, EPS_ETA).unwrap();
    let l = policy_gradient(&mut tape, w, trajs, &stats, nls_weight, 1.0).unwrap();
    let g = tape.gradients(l).unwrap().get(v).map(|g| g.data().to_vec());
    (scalar(&tape, l), g.unwrap_or_else(|| vec![0.0; eta.len()]))
}

fn with_refined(mut trajs: Vec<Trajectory>, values: &[f64]) -> Vec<Trajectory> {
    for (t, &f) in trajs.iter_mut().zip(values) {
        t.refined = Some((t.solution.clone(), f));
    }
    trajs
}

#[test]
fn surrogate_of_two_rollouts_matches_finite_differences() {
    let s = setup(ProblemKind::Tsp, 8, 1);
    let x = common::random_tensor(&mut rng(1), s.graph.edge_count(), 1, -1.0, 1.0);
    let eta0: Vec<f64> = x.data().iter().map(|v| 1.0 / (1.0 + (-v).exp())).collect();
    let mut trajs = rollouts(&s, &eta0, 2, 7);
    trajs[0].objective = 1.0;
    trajs[1].objective = 3.0;
    let stats = BatchStats::new(&trajs).unwrap();
    assert_eq!(stats.baseline, 2.0);
    let (value, _) = surrogate_grad(&eta0, &trajs, 0.0);
    let oracle = (-trajs[0].log_prob + trajs[1].log_prob) / 2.0;
    assert!((value - oracle).abs() < 1e-9 * oracle.abs().max(1.0));
    let ratio = fd_ratio(&x, |t, v| {
        let eta = t.sigmoid(v)?;
        let w = t.add_scalar(eta, EPS_ETA)?;
        policy_gradient(t, w, &trajs, &stats, 0.0, 1.0)
    });
    assert!(ratio <= 1.0, "ratio {ratio}");
}

#[test]
fn zero_advantages_give_zero_gradient() {
    let s = setup(ProblemKind::Tsp, 12, 2);
    let mut trajs = rollouts(&s, &s.eta, 6, 1);
    for t in &mut trajs {
        t.objective = 2.5;
    }
    let (value, g) = surrogate_grad(&s.eta, &trajs, 0.0);
    assert_eq!(value, 0.0);
    assert!(g.iter().all(|&x| x == 0.0));
}

#[test]
fn zero_advantages_leave_every_parameter_untouched() {
    let inst = Instance::generate(ProblemKind::Tsp, 10, 3).unwrap();
    let graph = ConstructionGraph::sparsify(&inst);
    let config = TrainerConfig {
        size: 10,
        architecture: small_gnn(1),
        ..TrainerConfig::default()
    };
    let mut model = Trainer::<f64>::new(config).unwrap().model;
    let mut tape = Tape::new();
    let heads = model.forward(&mut tape, &inst, &graph).unwrap();
    let eta = tape.value(heads[0]).to_f64();
    let s = Setup {
        inst: inst.clone(),
        graph: graph.clone(),
        eta: eta.clone(),
    };
    let mut trajs = rollouts(&s, &eta, 4, 0);
    for t in &mut trajs {
        t.objective = 1.0;
    }
    let stats = BatchStats::new(&trajs).unwrap();
    let w = tape.add_scalar(heads[0], EPS_ETA).unwrap();
    let l = policy_gradient(&mut tape, w, &trajs, &stats, 0.0, 1.0).unwrap();
    tape.backward(l, model.store_mut()).unwrap();
    assert!(model.store().iter().all(|(_, p)| p.grad.data().iter().all(|&g| g == 0.0)));
}

#[test]
fn without_nls_weight_refined_values_are_ignored() {
    let s = setup(ProblemKind::Tsp, 12, 4);
    let trajs = rollouts(&s, &s.eta, 5, 2);
    let a = with_refined(trajs.clone(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    let b = with_refined(trajs.clone(), &[9.0, -1.0, 0.5, 7.0, 2.0]);
    let plain = surrogate_grad(&s.eta, &trajs, 0.0);
    assert_eq!(surrogate_grad(&s.eta, &a, 0.0), plain);
    assert_eq!(surrogate_grad(&s.eta, &b, 0.0), plain);
}

#[test]
fn refined_objectives_enter_only_as_constant_weights() {
    let s = setup(ProblemKind::Tsp, 12, 5);
    let trajs = rollouts(&s, &s.eta, 5, 3);
    let refined = [3.1, 2.9, 3.3, 3.0, 2.7];
    let both = with_refined(trajs.clone(), &refined);
    let (_, g) = surrogate_grad(&s.eta, &both, 9.0);
    let (_, g_f) = surrogate_grad(&s.eta, &trajs, 0.0);
    let mut only_nls = trajs.clone();
    for (t, &f) in only_nls.iter_mut().zip(&refined) {
        t.objective = f;
    }
    let (_, g_nls) = surrogate_grad(&s.eta, &only_nls, 0.0);
    for i in 0..g.len() {
        let expect = g_f[i] + 9.0 * g_nls[i];
        assert!((g[i] - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
    }
}

#[test]
fn positive_nls_weight_needs_refined_rollouts() {
    let s = setup(ProblemKind::Tsp, 10, 6);
    let trajs = rollouts(&s, &s.eta, 3, 0);
    let stats = BatchStats::new(&trajs).unwrap();
    assert!(stats.baseline_nls.is_none());
    assert!(stats.advantage(&trajs[0], 1.0).is_err());
}

#[test]
fn shifting_every_objective_leaves_the_gradient_unchanged() {
    let s = setup(ProblemKind::Tsp, 15, 7);
    let trajs = rollouts(&s, &s.eta, 8, 4);
    let mut shifted = trajs.clone();
    for t in &mut shifted {
        t.objective += 17.0;
    }
    let (_, a) = surrogate_grad(&s.eta, &trajs, 0.0);
    let (_, b) = surrogate_grad(&s.eta, &shifted, 0.0);
    assert!(a.iter().any(|&x| x != 0.0));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
    }
}

#[test]
fn one_rollout_is_rejected() {
    let s = setup(ProblemKind::Tsp, 10, 8);
    let trajs = rollouts(&s, &s.eta, 1, 0);
    assert!(matches!(BatchStats::new(&trajs), Err(Error::InvalidArgument(_))));
    let config = TrainerConfig {
        rollouts: 1,
        ..TrainerConfig::default()
    };
    assert!(config.validate().is_err());
}

#[test]
fn mismatched_batch_is_rejected() {
    let s = setup(ProblemKind::Tsp, 10, 9);
    let trajs = rollouts(&s, &s.eta, 4, 0);
    let stats = BatchStats::new(&trajs[..2]).unwrap();
    let mut tape = Tape::new();
    let w = tape.leaf(column(&s.eta)).unwrap();
    assert!(policy_gradient(&mut tape, w, &trajs, &stats, 0.0, 1.0).is_err());
}

#[test]
fn near_delta_measures_give_zero_advantages() {
    let s = setup(ProblemKind::Tsp, 12, 10);
    let order: Vec<usize> = (0..12).collect();
    let full = Setup {
        graph: ConstructionGraph::sparsify_with(&s.inst, 11),
        ..s
    };
    let mut eta = vec![1e-12; full.graph.edge_count()];
    for w in 0..12 {
        let (a, b) = (order[w], order[(w + 1) % 12]);
        eta[full.graph.edge(a, b).unwrap()] = 1.0;
        eta[full.graph.edge(b, a).unwrap()] = 1.0;
    }
    let trajs = rollouts(&full, &eta, 20, 5);
    let stats = BatchStats::new(&trajs).unwrap();
    for t in &trajs {
        assert!(stats.advantage(t, 0.0).unwrap().abs() < 1e-9);
    }
}

/// Expected tour length when every step picks uniformly among the
/// unvisited cities, by dynamic programming over visited sets.
fn uniform_expectation(n: usize, dist: impl Fn(usize, usize) -> f64) -> f64 {
    let full = (1usize << n) - 1;
    let mut total = 0.0;
    for start in 0..n {
        // e[mask * n + cur]: expected remaining length.
        let mut e = vec![0.0; (full + 1) * n];
        for mask in (1..=full).rev() {
            for cur in 0..n {
                if mask & (1 << cur) == 0 || mask & (1 << start) == 0 {
                    continue;
                }
                if mask == full {
                    e[mask * n + cur] = dist(cur, start);
                    continue;
                }
                let free: Vec<usize> = (0..n).filter(|j| mask & (1 << j) == 0).collect();
                let sum: f64 = free.iter().map(|&j| dist(cur, j) + e[(mask | (1 << j)) * n + j]).sum();
                e[mask * n + cur] = sum / free.len() as f64;
            }
        }
        total += e[(1 << start) * n + start];
    }
    total / n as f64
}

#[test]
fn uniform_rollouts_match_the_exact_expectation() {
    let inst = Instance::generate(ProblemKind::Tsp, 10, 11).unwrap();
    let graph = ConstructionGraph::sparsify_with(&inst, 9);
    let geo = inst.geometry().unwrap();
    let exact = uniform_expectation(10, |i, j| geo.dist(i, j));
    let field = HeuristicField::uniform(PheromoneModel::Successor, graph.edge_count());
    let n = 10_000;
    let trajs = rollout_batch(&inst, &graph, &field, n, 1.0, 1.0, None, 12).unwrap();
    let mean = trajs.iter().map(|t| t.objective).sum::<f64>() / n as f64;
    let var = trajs.iter().map(|t| (t.objective - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!((mean - exact).abs() < 3.0 * se, "mean {mean} exact {exact} se {se}");
}

fn small_gnn(heads: usize) -> Architecture {
    Architecture::Gnn(GnnConfig {
        layers: 1,
        hidden: 4,
        decoder_width: 4,
        heads,
    })
}

#[test]
fn composite_loss_matches_finite_differences() {
    let config = TrainerConfig {
        size: 8,
        architecture: small_gnn(2),
        rollouts: 4,
        nls_weight: 9.0,
        local_search: LocalSearch::Nls(NlsConfig {
            iterations: 2,
            perturbation_moves: 3,
        }),
        kl_coef: 0.05,
        topk_coef: 0.05,
        imitation_coef: 0.02,
        topk: 3,
        sparsity: Some(4),
        seed: 3,
        ..TrainerConfig::default()
    };
    let mut trainer = Trainer::<f64>::new(config).unwrap();
    let inst = Instance::generate(ProblemKind::Tsp, 8, 21).unwrap();
    let mut tape = Tape::new();
    let (loss, stats) = trainer.instance_loss(&mut tape, &inst, 5).unwrap();
    assert!(stats.mean_f_nls.is_finite() && stats.mean_f_nls <= stats.mean_f + 1e-9);
    tape.backward(loss, trainer.model.store_mut()).unwrap();
    let ids: Vec<_> = trainer.model.store().iter().map(|(id, _)| id).collect();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for id in ids {
        let analytic = trainer.model.store().grad(id).data().to_vec();
        for (i, &a) in analytic.iter().enumerate() {
            let orig = trainer.model.store().value(id).data()[i];
            let mut at = |x: f64| {
                trainer.model.store_mut().value_mut(id).data_mut()[i] = x;
                let mut t = Tape::new();
                let (l, _) = trainer.instance_loss(&mut t, &inst, 5).unwrap();
                scalar(&t, l)
            };
            let numeric = (at(orig + h) - at(orig - h)) / (2.0 * h);
            at(orig);
            let tol = 1e-4 * a.abs().max(numeric.abs()) + 1e-7;
            worst = worst.max((a - numeric).abs() / tol);
        }
    }
    assert!(worst <= 1.0, "worst ratio {worst}");
}

fn quick_config(seed: u64) -> TrainerConfig {
    TrainerConfig {
        size: 20,
        architecture: Architecture::Gnn(GnnConfig {
            layers: 2,
            hidden: 16,
            decoder_width: 16,
            heads: 1,
        }),
        instances: 8,
        epochs: 2,
        batch_size: 2,
        rollouts: 6,
        seed,
        ..TrainerConfig::default()
    }
}

#[test]
fn zero_learning_rate_keeps_parameters() {
    let config = TrainerConfig { lr: 0.0, ..quick_config(1) };
    let before = Trainer::<f64>::new(config.clone()).unwrap().model.to_checkpoint().unwrap();
    let (model, log) = train(config).unwrap();
    assert_eq!(log.epochs.len(), 2);
    assert_eq!(model.to_checkpoint().unwrap(), before);
}

#[test]
fn training_is_deterministic() {
    let (a, la) = train(quick_config(2)).unwrap();
    let (b, lb) = train(quick_config(2)).unwrap();
    assert_eq!(a.to_checkpoint().unwrap(), b.to_checkpoint().unwrap());
    for (x, y) in la.epochs.iter().zip(&lb.epochs) {
        assert_eq!((x.mean_f, x.loss), (y.mean_f, y.loss));
    }
    let (c, _) = train(quick_config(3)).unwrap();
    assert_ne!(a.to_checkpoint().unwrap(), c.to_checkpoint().unwrap());
}

#[test]
fn training_log_csv_has_fixed_columns() {
    let (_, log) = train(quick_config(4)).unwrap();
    let csv = log.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epoch,mean_f,mean_f_nls,loss,seconds"));
    assert_eq!(lines.count(), 2);
    assert!(log.epochs.iter().all(|e| e.mean_f_nls.is_nan()));
}

#[test]
fn tsp20_rollouts_improve_during_training() {
    let mut first = 0.0;
    let mut last = 0.0;
    for seed in 0..3 {
        let config = TrainerConfig {
            instances: 160,
            epochs: 4,
            rollouts: 20,
            lr: 3e-3,
            seed,
            ..TrainerConfig::for_problem(ProblemKind::Tsp, 20)
        };
        let (_, log) = train(config).unwrap();
        first += log.epochs[0].mean_f;
        last += log.epochs.last().unwrap().mean_f;
    }
    assert!(last < first, "first {first} last {last}");
}

#[test]
fn exploding_updates_report_the_epoch() {
    let config = TrainerConfig {
        instances: 4,
        epochs: 2,
        batch_size: 2,
        lr: 1e200,
        grad_clip: None,
        ..quick_config(5)
    };
    match train(config) {
        Err(Error::Diverged { epoch }) => assert_eq!(epoch, 1),
        other => panic!("expected divergence, got {:?}", other.map(|(_, l)| l)),
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let base = TrainerConfig::default();
    let bad = [
        TrainerConfig { nls_weight: -1.0, ..base.clone() },
        TrainerConfig { topk: 0, ..base.clone() },
        TrainerConfig { lr: f64::NAN, ..base.clone() },
        TrainerConfig {
            nls_weight: 9.0,
            local_search: LocalSearch::None,
            ..base.clone()
        },
        TrainerConfig { instances: 3, epochs: 4, ..base.clone() },
    ];
    for c in bad {
        assert!(c.validate().is_err());
    }
    assert!(base.validate().is_ok());
    assert_eq!(TrainerConfig::for_problem(ProblemKind::Op, 50).instances, 320);
}
