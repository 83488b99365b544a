#![allow(dead_code)]

use colony::autodiff::{Tape, Tensor, Var};
use colony::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tensor with entries uniform in `[lo, hi]`.
pub fn random_tensor(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Tensor<f64> {
    let data = (0..rows * cols).map(|_| rng.gen_range(lo..=hi)).collect();
    Tensor::new(rows, cols, data).unwrap()
}

/// Evaluates `f` at `x` on a fresh tape and returns the scalar loss.
fn eval(x: &Tensor<f64>, f: &dyn Fn(&mut Tape<f64>, Var) -> Result<Var>) -> f64 {
    let mut tape = Tape::new();
    let v = tape.leaf(x.clone()).unwrap();
    let out = f(&mut tape, v).unwrap();
    tape.value(out).data()[0]
}

/// Compares the tape gradient of `f` at `x` with central differences
/// (h = 1e-5). Returns the worst error relative to `1e-4 · max(|a|, |n|) +
/// 1e-7`; values at most 1 pass.
pub fn fd_ratio(x: &Tensor<f64>, f: impl Fn(&mut Tape<f64>, Var) -> Result<Var>) -> f64 {
    let mut tape = Tape::new();
    let v = tape.leaf(x.clone()).unwrap();
    let out = f(&mut tape, v).unwrap();
    let grads = tape.gradients(out).unwrap();
    let analytic: Vec<f64> = grads
        .get(v)
        .map(|g| g.data().to_vec())
        .unwrap_or_else(|| vec![0.0; x.len()]);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut xp = x.clone();
        xp.data_mut()[i] += h;
        let mut xm = x.clone();
        xm.data_mut()[i] -= h;
        let numeric = (eval(&xp, &f) - eval(&xm, &f)) / (2.0 * h);
        let a = analytic[i];
        let tol = 1e-4 * a.abs().max(numeric.abs()) + 1e-7;
        worst = worst.max((a - numeric).abs() / tol);
    }
    worst
}

/// Reduces `y` to a scalar with fixed random weights so every output
/// entry carries a distinct upstream gradient.
pub fn readout(tape: &mut Tape<f64>, y: Var, seed: u64) -> Result<Var> {
    let [r, c] = tape.shape(y);
    let w = random_tensor(&mut rng(seed), r, c, -1.0, 1.0);
    let w = tape.constant(w)?;
    let p = tape.mul(y, w)?;
    tape.sum(p)
}

/// Exact TSP optimum by Held-Karp dynamic programming over a full
/// distance matrix (`n <= 15`). Returns the length and an optimal tour
/// starting at city 0.
pub fn held_karp(n: usize, dist: impl Fn(usize, usize) -> f64) -> (f64, Vec<usize>) {
    assert!((2..=15).contains(&n));
    let full = 1usize << (n - 1);
    // dp[mask][j]: shortest path from 0 through `mask` (cities 1..n) ending at j.
    let mut dp = vec![f64::INFINITY; full * n];
    let mut parent = vec![usize::MAX; full * n];
    for j in 1..n {
        dp[(1 << (j - 1)) * n + j] = dist(0, j);
    }
    for mask in 1..full {
        for j in 1..n {
            let bit = 1 << (j - 1);
            if mask & bit == 0 || !dp[mask * n + j].is_finite() {
                continue;
            }
            let base = dp[mask * n + j];
            for k in 1..n {
                let kb = 1 << (k - 1);
                if mask & kb != 0 {
                    continue;
                }
                let next = mask | kb;
                let cand = base + dist(j, k);
                if cand < dp[next * n + k] {
                    dp[next * n + k] = cand;
                    parent[next * n + k] = j;
                }
            }
        }
    }
    let last = full - 1;
    let (mut best, mut end) = (f64::INFINITY, 0);
    for j in 1..n {
        let v = dp[last * n + j] + dist(j, 0);
        if v < best {
            best = v;
            end = j;
        }
    }
    let mut tour = Vec::with_capacity(n);
    let (mut mask, mut j) = (last, end);
    while j != usize::MAX && j != 0 {
        tour.push(j);
        let p = parent[mask * n + j];
        mask &= !(1 << (j - 1));
        j = if mask == 0 { usize::MAX } else { p };
    }
    tour.push(0);
    tour.reverse();
    (best, tour)
}

/// Length of the closed tour under `dist`.
pub fn tour_length(tour: &[usize], dist: impl Fn(usize, usize) -> f64) -> f64 {
    (0..tour.len()).map(|k| dist(tour[k], tour[(k + 1) % tour.len()])).sum()
}

/// Whether `tour` is a permutation of `0..n`.
pub fn is_permutation(tour: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    tour.len() == n && tour.iter().all(|&c| c < n && !std::mem::replace(&mut seen[c], true))
}
