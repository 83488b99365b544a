mod common;

use std::sync::Arc;

use colony::autodiff::{CategoricalEvents, Checkpoint, ParamId, ParamStore, Tape, Tensor, Var};
use colony::Error;
use common::{fd_ratio, random_tensor, readout, rng};
use proptest::prelude::*;

fn t(rows: usize, cols: usize, data: &[f64]) -> Tensor<f64> {
    Tensor::new(rows, cols, data.to_vec()).unwrap()
}

#[test]
fn sigmoid_of_zero_is_half() {
    let mut tape = Tape::<f64>::new();
    let x = tape.leaf(Tensor::scalar(0.0)).unwrap();
    let y = tape.sigmoid(x).unwrap();
    assert_eq!(tape.value(y).data(), &[0.5]);
}

#[test]
fn silu_at_zero() {
    let mut tape = Tape::<f64>::new();
    let x = tape.leaf(Tensor::scalar(0.0)).unwrap();
    let y = tape.silu(x).unwrap();
    assert_eq!(tape.value(y).data(), &[0.0]);
    let g = tape.gradients(y).unwrap();
    assert!((g.get(x).unwrap().data()[0] - 0.5).abs() < 1e-15);
}

#[test]
fn matmul_by_identity() {
    let mut tape = Tape::<f64>::new();
    let a = tape.leaf(t(2, 2, &[1.0, 2.0, 3.0, 4.0])).unwrap();
    let i = tape.constant(t(2, 2, &[1.0, 0.0, 0.0, 1.0])).unwrap();
    let y = tape.matmul(a, i).unwrap();
    assert_eq!(tape.value(y).data(), &[1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn matmul_shape_error_names_op_and_dims() {
    let mut tape = Tape::<f64>::new();
    let a = tape.leaf(Tensor::zeros(2, 3)).unwrap();
    let b = tape.leaf(Tensor::zeros(2, 3)).unwrap();
    match tape.matmul(a, b) {
        Err(Error::Shape { op, lhs, rhs }) => {
            assert_eq!(op, "matmul");
            assert_eq!(lhs, [2, 3]);
            assert_eq!(rhs, [2, 3]);
        }
        other => panic!("expected shape error, got {other:?}"),
    }
}

#[test]
fn add_shape_error() {
    let mut tape = Tape::<f64>::new();
    let a = tape.leaf(Tensor::zeros(2, 3)).unwrap();
    let b = tape.leaf(Tensor::zeros(3, 2)).unwrap();
    assert!(matches!(tape.add(a, b), Err(Error::Shape { op: "add", .. })));
}

#[test]
fn sigmoid_sum_gradient() {
    let mut store = ParamStore::<f64>::new();
    let id = store.add("x", Tensor::scalar(0.0)).unwrap();
    let mut tape = Tape::<f64>::new();
    let x = tape.param(&store, id).unwrap();
    let s = tape.sigmoid(x).unwrap();
    let loss = tape.sum(s).unwrap();
    tape.backward(loss, &mut store).unwrap();
    assert!((store.grad(id).data()[0] - 0.25).abs() < 1e-15);
}

#[test]
fn elementwise_product_gradient_is_other_factor() {
    let mut store = ParamStore::<f64>::new();
    let id = store.add("b", Tensor::row(vec![0.7, -1.3])).unwrap();
    let mut tape = Tape::<f64>::new();
    let a = tape.constant(Tensor::row(vec![2.0, 3.0])).unwrap();
    let b = tape.param(&store, id).unwrap();
    let p = tape.mul(a, b).unwrap();
    let loss = tape.sum(p).unwrap();
    tape.backward(loss, &mut store).unwrap();
    assert_eq!(store.grad(id).data(), &[2.0, 3.0]);
}

#[test]
fn backward_accumulates_instead_of_overwriting() {
    let mut store = ParamStore::<f64>::new();
    let id = store.add("b", Tensor::row(vec![1.0, 1.0])).unwrap();
    for _ in 0..2 {
        let mut tape = Tape::<f64>::new();
        let a = tape.constant(Tensor::row(vec![2.0, 3.0])).unwrap();
        let b = tape.param(&store, id).unwrap();
        let p = tape.mul(a, b).unwrap();
        let loss = tape.sum(p).unwrap();
        tape.backward(loss, &mut store).unwrap();
    }
    assert_eq!(store.grad(id).data(), &[4.0, 6.0]);
}

#[test]
fn non_scalar_loss_is_rejected() {
    let mut store = ParamStore::<f64>::new();
    let mut tape = Tape::<f64>::new();
    let a = tape.leaf(Tensor::zeros(2, 2)).unwrap();
    assert!(matches!(tape.backward(a, &mut store), Err(Error::NonScalarLoss { shape: [2, 2] })));
}

#[test]
fn non_finite_forward_names_op() {
    let mut tape = Tape::<f64>::new();
    let a = tape.leaf(Tensor::scalar(0.0)).unwrap();
    assert!(matches!(tape.log(a), Err(Error::NonFinite { op: "log" })));
}

#[test]
fn non_finite_gradient_names_op() {
    let mut tape = Tape::<f64>::new();
    let a = tape.leaf(Tensor::scalar(1e-300)).unwrap();
    let l = tape.log(a).unwrap();
    let s = tape.scale(l, 1e300).unwrap();
    assert!(matches!(tape.gradients(s), Err(Error::NonFiniteGrad { op: "log" })));
}

/// Accumulates exactly `g` into the gradient of `id`.
fn set_grad(store: &mut ParamStore<f64>, id: ParamId, g: &Tensor<f64>) {
    let mut tape = Tape::<f64>::new();
    let p = tape.param(store, id).unwrap();
    let c = tape.constant(g.clone()).unwrap();
    let y = tape.mul(p, c).unwrap();
    let loss = tape.sum(y).unwrap();
    tape.backward(loss, store).unwrap();
}

fn check(name: &str, ratio: f64) {
    assert!(ratio <= 1.0, "{name}: finite-difference mismatch ratio {ratio}");
}

/// Every primitive composed with a random linear readout.
fn primitive_ratios(seed: u64) -> Vec<(&'static str, f64)> {
    let mut r = rng(seed);
    let x = random_tensor(&mut r, 3, 4, -2.0, 2.0);
    let other = random_tensor(&mut r, 3, 4, -2.0, 2.0);
    let right = random_tensor(&mut r, 4, 2, -2.0, 2.0);
    let row = random_tensor(&mut r, 1, 4, -2.0, 2.0);
    let positive = random_tensor(&mut r, 3, 4, 0.2, 2.0);
    let idx: Arc<[usize]> = vec![2, 0, 0, 1, 2].into();
    let seg: Arc<[usize]> = vec![1, 0, 1].into();
    let mut out = Vec::new();
    let mut case = |name: &'static str, input: &Tensor<f64>, f: &dyn Fn(&mut Tape<f64>, Var) -> colony::Result<Var>| {
        let ratio = fd_ratio(input, |tape: &mut Tape<f64>, v| {
            let y = f(tape, v)?;
            readout(tape, y, seed ^ 0x5eed)
        });
        out.push((name, ratio));
    };
    case("matmul", &x, &|tape, v| {
        let b = tape.constant(right.clone())?;
        tape.matmul(v, b)
    });
    case("matmul_rhs", &right, &|tape, v| {
        let a = tape.constant(other.clone())?;
        tape.matmul(a, v)
    });
    case("transpose", &x, &|tape, v| tape.transpose(v));
    case("add", &x, &|tape, v| {
        let b = tape.constant(other.clone())?;
        tape.add(v, b)
    });
    case("sub", &x, &|tape, v| {
        let b = tape.constant(other.clone())?;
        tape.sub(b, v)
    });
    case("mul", &x, &|tape, v| {
        let b = tape.constant(other.clone())?;
        tape.mul(v, b)
    });
    case("div_numerator", &x, &|tape, v| {
        let b = tape.constant(positive.clone())?;
        tape.div(v, b)
    });
    case("div_denominator", &positive, &|tape, v| {
        let a = tape.constant(other.clone())?;
        tape.div(a, v)
    });
    case("add_row", &row, &|tape, v| {
        let a = tape.constant(other.clone())?;
        tape.add_row(a, v)
    });
    case("mul_row", &row, &|tape, v| {
        let a = tape.constant(other.clone())?;
        tape.mul_row(a, v)
    });
    case("mul_row_lhs", &x, &|tape, v| {
        let g = tape.constant(row.clone())?;
        tape.mul_row(v, g)
    });
    case("scale", &x, &|tape, v| tape.scale(v, -1.7));
    case("add_scalar", &x, &|tape, v| tape.add_scalar(v, 0.3));
    case("sigmoid", &x, &|tape, v| tape.sigmoid(v));
    case("silu", &x, &|tape, v| tape.silu(v));
    case("log", &positive, &|tape, v| tape.log(v));
    case("exp", &x, &|tape, v| tape.exp(v));
    case("norm_rows", &x, &|tape, v| tape.norm_rows(v));
    case("softmax_rows", &x, &|tape, v| tape.softmax_rows(v));
    case("gather_rows", &x, &|tape, v| tape.gather_rows(v, idx.clone()));
    case("segment_sum", &x, &|tape, v| tape.segment_sum(v, seg.clone(), 3));
    case("segment_mean", &x, &|tape, v| tape.segment_mean(v, seg.clone(), 3));
    case("concat_cols", &x, &|tape, v| {
        let b = tape.constant(other.clone())?;
        tape.concat_cols(&[b, v, v])
    });
    case("slice_cols", &x, &|tape, v| tape.slice_cols(v, 1, 2));
    case("sum", &x, &|tape, v| tape.sum(v));
    case("mean", &x, &|tape, v| tape.mean(v));
    let weights = random_tensor(&mut r, 6, 1, 0.1, 2.0);
    case("categorical_log_prob", &weights, &|tape, v| {
        let mut ev = CategoricalEvents::new();
        ev.begin_group();
        ev.push(2, &[0, 2, 5]);
        ev.push(1, &[1, 3]);
        ev.begin_group();
        ev.push(4, &[4, 0, 1, 2]);
        tape.categorical_log_prob(v, Arc::new(ev), vec![0.7, -1.3], 1.5)
    });
    out
}

#[test]
fn every_primitive_matches_finite_differences() {
    for (name, ratio) in primitive_ratios(11) {
        check(name, ratio);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn primitive_gradients_hold_for_random_inputs(seed in any::<u64>()) {
        for (name, ratio) in primitive_ratios(seed) {
            prop_assert!(ratio <= 1.0, "{} ratio {}", name, ratio);
        }
    }

    #[test]
    fn forward_replay_is_bit_identical(seed in any::<u64>()) {
        let run = || {
            let mut r = rng(seed);
            let x = random_tensor(&mut r, 4, 3, -2.0, 2.0);
            let w = random_tensor(&mut r, 3, 5, -2.0, 2.0);
            let mut tape = Tape::<f64>::new();
            let a = tape.leaf(x).unwrap();
            let b = tape.constant(w).unwrap();
            let y = tape.matmul(a, b).unwrap();
            let y = tape.norm_rows(y).unwrap();
            let y = tape.softmax_rows(y).unwrap();
            tape.value(y).data().to_vec()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn backward_is_linear_in_the_loss(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_tensor(&mut r, 3, 3, -2.0, 2.0);
        let grad_of = |which: u8| {
            let mut tape = Tape::<f64>::new();
            let v = tape.leaf(x.clone()).unwrap();
            let s = tape.sigmoid(v).unwrap();
            let l1 = readout(&mut tape, s, 1).unwrap();
            let e = tape.silu(v).unwrap();
            let l2 = readout(&mut tape, e, 2).unwrap();
            let loss = match which {
                1 => l1,
                2 => l2,
                _ => tape.add(l1, l2).unwrap(),
            };
            tape.gradients(loss).unwrap().get(v).unwrap().data().to_vec()
        };
        let (g1, g2, g) = (grad_of(1), grad_of(2), grad_of(0));
        for k in 0..g.len() {
            prop_assert!((g[k] - (g1[k] + g2[k])).abs() < 1e-10);
        }
    }
}

#[test]
fn two_layer_network_matches_finite_differences() {
    let mut r = rng(5);
    let input = random_tensor(&mut r, 5, 4, -2.0, 2.0);
    let w1 = random_tensor(&mut r, 4, 4, -1.0, 1.0);
    let b1 = random_tensor(&mut r, 1, 4, -1.0, 1.0);
    let w2 = random_tensor(&mut r, 4, 1, -1.0, 1.0);
    // Differentiate with respect to each weight in turn.
    let net = |w1: &Tensor<f64>, b1: &Tensor<f64>, w2: &Tensor<f64>, which: usize| {
        let (input, w1, b1, w2) = (input.clone(), w1.clone(), b1.clone(), w2.clone());
        move |tape: &mut Tape<f64>, v| {
            let x = tape.constant(input.clone())?;
            let a = if which == 0 { v } else { tape.constant(w1.clone())? };
            let b = if which == 1 { v } else { tape.constant(b1.clone())? };
            let c = if which == 2 { v } else { tape.constant(w2.clone())? };
            let h = tape.matmul(x, a)?;
            let h = tape.add_row(h, b)?;
            let h = tape.silu(h)?;
            let y = tape.matmul(h, c)?;
            let y = tape.sigmoid(y)?;
            tape.sum(y)
        }
    };
    check("w1", fd_ratio(&w1, net(&w1, &b1, &w2, 0)));
    check("b1", fd_ratio(&b1, net(&w1, &b1, &w2, 1)));
    check("w2", fd_ratio(&w2, net(&w1, &b1, &w2, 2)));
}

#[test]
fn adam_leaves_parameters_unchanged_without_gradient() {
    let mut store = ParamStore::<f64>::new();
    let id = store.add("p", Tensor::row(vec![0.5, -2.0])).unwrap();
    store.adam_step(1e-3).unwrap();
    assert_eq!(store.value(id).data(), &[0.5, -2.0]);
}

#[test]
fn adam_first_step_moves_by_learning_rate() {
    let mut store = ParamStore::<f64>::new();
    let id = store.add("p", Tensor::scalar(1.0)).unwrap();
    set_grad(&mut store, id, &Tensor::scalar(1.0));
    store.adam_step(1e-3).unwrap();
    // m = 0.1, v = 0.001; bias correction gives m̂ = v̂ = 1.
    let (b1, b2, eps, lr): (f64, f64, f64, f64) = (0.9, 0.999, 1e-8, 1e-3);
    let m_hat = (1.0 - b1) / (1.0 - b1);
    let v_hat = (1.0 - b2) / (1.0 - b2);
    let expected = 1.0 - lr * m_hat / (v_hat.sqrt() + eps);
    assert!((store.value(id).data()[0] - expected).abs() < 1e-15);
    assert!((1.0 - store.value(id).data()[0] - 1e-3).abs() < 1e-10);
    assert_eq!(store.grad(id).data(), &[0.0]);
}

#[test]
fn adam_moments_decay_over_zero_gradient_steps() {
    let mut store = ParamStore::<f64>::new();
    let id = store.add("p", Tensor::scalar(0.0)).unwrap();
    set_grad(&mut store, id, &Tensor::scalar(2.0));
    store.adam_step(1e-2).unwrap();
    store.adam_step(1e-2).unwrap();
    store.adam_step(1e-2).unwrap();
    let p = store.param(id);
    let m = 0.1 * 2.0 * 0.9 * 0.9;
    let v = 0.001 * 4.0 * 0.999 * 0.999;
    assert!((p.first_moment()[0] - m).abs() < 1e-15);
    assert!((p.second_moment()[0] - v).abs() < 1e-15);
    assert_eq!(store.steps(), 3);
}

#[test]
fn adam_rejects_nonpositive_learning_rate() {
    let mut store = ParamStore::<f64>::new();
    store.add("p", Tensor::scalar(0.0)).unwrap();
    assert!(store.adam_step(0.0).is_err());
    assert!(store.adam_step(-1.0).is_err());
}

#[test]
fn duplicate_parameter_names_are_rejected() {
    let mut store = ParamStore::<f64>::new();
    store.add("p", Tensor::scalar(0.0)).unwrap();
    assert!(matches!(store.add("p", Tensor::scalar(1.0)), Err(Error::DuplicateParam(_))));
}

#[test]
fn gradient_clipping_caps_joint_norm() {
    let mut store = ParamStore::<f64>::new();
    let a = store.add("a", Tensor::row(vec![0.0, 0.0])).unwrap();
    let b = store.add("b", Tensor::scalar(0.0)).unwrap();
    set_grad(&mut store, a, &Tensor::row(vec![3.0, 0.0]));
    set_grad(&mut store, b, &Tensor::scalar(4.0));
    assert_eq!(store.clip_grad_norm(1.0), 5.0);
    assert!((store.grad_norm() - 1.0).abs() < 1e-15);
    assert!((store.grad(a).data()[0] - 0.6).abs() < 1e-15);
    assert!((store.clip_grad_norm(10.0) - 1.0).abs() < 1e-15);
    assert!((store.grad(b).data()[0] - 0.8).abs() < 1e-15);
}

fn sample_store() -> ParamStore<f64> {
    let mut r = rng(3);
    let mut store = ParamStore::new();
    store.add_uniform("layer.w", 3, 4, 3, &mut r).unwrap();
    store.add_uniform("layer.b", 1, 4, 3, &mut r).unwrap();
    store.add("odd", Tensor::row(vec![f64::MIN_POSITIVE, -0.0, 1e300, 1.0 / 3.0])).unwrap();
    store
}

#[test]
fn checkpoint_round_trips_byte_for_byte() {
    let store = sample_store();
    let meta = serde_json::json!({"architecture": {"layers": 2}, "normalization": "layer", "seed": 3});
    let ckpt = Checkpoint::from_store(&store, &meta).unwrap();
    let bytes = ckpt.to_bytes();
    let back = Checkpoint::from_bytes(&bytes).unwrap();
    assert_eq!(back, ckpt);
    assert_eq!(back.to_bytes(), bytes);
    let mut fresh = sample_store();
    fresh.zero_values();
    back.load_into(&mut fresh).unwrap();
    for ((_, p), (_, q)) in fresh.iter().zip(store.iter()) {
        let bits = |t: &Tensor<f64>| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&p.value), bits(&q.value));
    }
    let m: serde_json::Value = back.metadata().unwrap();
    assert_eq!(m, meta);
}

#[test]
fn checkpoint_rejects_corruption_and_mismatch() {
    let store = sample_store();
    let ckpt = Checkpoint::from_store(&store, &"meta").unwrap();
    let bytes = ckpt.to_bytes();
    assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    assert!(Checkpoint::from_bytes(&bad).is_err());
    let mut other = ParamStore::<f64>::new();
    other.add("layer.w", Tensor::zeros(4, 3)).unwrap();
    assert!(ckpt.load_into(&mut other).is_err());
}

#[test]
fn single_precision_tape_runs() {
    let mut tape = Tape::<f32>::new();
    let x = tape.leaf(Tensor::new(1, 2, vec![0.0f32, 1.0]).unwrap()).unwrap();
    let y = tape.sigmoid(x).unwrap();
    let s = tape.sum(y).unwrap();
    let g = tape.gradients(s).unwrap();
    assert!((g.get(x).unwrap().data()[0] - 0.25).abs() < 1e-6);
}
