use rand::Rng;

use super::costs::CostField;
use crate::error::{Error, Result};

/// Moves must improve the surrogate by more than this.
const IMPROVEMENT_EPS: f64 = 1e-10;

/// Rejects moves that would push the tour length (under `distances`) above
/// `budget`. `length` tracks the current tour length.
#[derive(Clone, Debug)]
pub struct LengthGuard<'a> {
    pub distances: &'a CostField,
    pub budget: f64,
    pub length: f64,
}

/// Result of a 2-opt run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoOptStats {
    pub moves: usize,
    /// True when the scan ended because no improving move remained.
    pub local_optimum: bool,
}

/// Tour with a position index for O(1) successor/predecessor lookups.
struct Tour<'t> {
    order: &'t mut [usize],
    pos: Vec<usize>,
}

impl<'t> Tour<'t> {
    fn new(order: &'t mut [usize], n: usize) -> Result<Self> {
        let mut pos = vec![usize::MAX; n];
        for (k, &c) in order.iter().enumerate() {
            if c >= n || pos[c] != usize::MAX {
                return Err(Error::InvalidArgument(format!("2-opt input is not a tour: node {c}")));
            }
            pos[c] = k;
        }
        Ok(Self { order, pos })
    }

    #[inline]
    fn len(&self) -> usize {
        self.order.len()
    }

    #[inline]
    fn succ(&self, c: usize) -> usize {
        self.order[(self.pos[c] + 1) % self.len()]
    }

    #[inline]
    fn pred(&self, c: usize) -> usize {
        self.order[(self.pos[c] + self.len() - 1) % self.len()]
    }

    /// Reverses the cyclic segment running forward from node `from` to
    /// node `to`, or its complement when that is shorter.
    fn reverse(&mut self, from: usize, to: usize) {
        let n = self.len();
        let (mut i, mut j) = (self.pos[from], self.pos[to]);
        let mut span = (j + n - i) % n + 1;
        if 2 * span > n {
            let (ni, nj) = ((j + 1) % n, (i + n - 1) % n);
            i = ni;
            j = nj;
            span = n - span;
        }
        for _ in 0..span / 2 {
            self.order.swap(i, j);
            self.pos[self.order[i]] = i;
            self.pos[self.order[j]] = j;
            i = (i + 1) % n;
            j = (j + n - 1) % n;
        }
    }
}

/// First-improvement 2-opt over the candidate lists of `costs`, applying at
/// most `max_moves` accepted moves (`None` runs to a local optimum). Cities
/// are scanned in index order.
pub fn two_opt(
    tour: &mut [usize],
    costs: &CostField,
    max_moves: Option<usize>,
    guard: Option<&mut LengthGuard<'_>>,
) -> Result<TwoOptStats> {
    two_opt_ordered(tour, costs, max_moves, guard, None)
}

/// [`two_opt`] scanning cities in the given `order` (a permutation of
/// `0..n`) on every pass.
pub fn two_opt_ordered(
    tour: &mut [usize],
    costs: &CostField,
    max_moves: Option<usize>,
    mut guard: Option<&mut LengthGuard<'_>>,
    order: Option<&[usize]>,
) -> Result<TwoOptStats> {
    let n = costs.len();
    if order.is_some_and(|o| o.len() != n) {
        return Err(Error::InvalidArgument("scan order must cover every city".into()));
    }
    if tour.len() != n {
        return Err(Error::InvalidArgument(format!(
            "2-opt tour has {} nodes, cost field {n}",
            tour.len()
        )));
    }
    let mut t = Tour::new(tour, n)?;
    let limit = max_moves.unwrap_or(usize::MAX);
    let mut moves = 0;
    if n < 4 {
        return Ok(TwoOptStats {
            moves,
            local_optimum: true,
        });
    }
    loop {
        let mut improved = false;
        for idx in 0..n {
            let a = order.map_or(idx, |o| o[idx]);
            if moves >= limit {
                return Ok(TwoOptStats {
                    moves,
                    local_optimum: false,
                });
            }
            // Successor direction: edges (a, b), (c, d) -> (a, c), (b, d).
            let b = t.succ(a);
            let d_ab = costs.cost(a, b);
            let mut applied = false;
            for &c in costs.neighbors(a) {
                let d_ac = costs.cost(a, c);
                if d_ac >= d_ab {
                    break;
                }
                let d = t.succ(c);
                if c == b || d == a {
                    continue;
                }
                let delta = d_ac + costs.cost(b, d) - d_ab - costs.cost(c, d);
                if delta < -IMPROVEMENT_EPS && admits(&guard, a, b, c, d) {
                    accept(&mut guard, a, b, c, d);
                    t.reverse(b, c);
                    applied = true;
                    break;
                }
            }
            if !applied {
                // Predecessor direction: edges (b, a), (d, c) -> (c, a), (d, b).
                let b = t.pred(a);
                let d_ba = costs.cost(b, a);
                for &c in costs.neighbors(a) {
                    let d_ac = costs.cost(a, c);
                    if d_ac >= d_ba {
                        break;
                    }
                    let d = t.pred(c);
                    if c == b || d == a {
                        continue;
                    }
                    let delta = d_ac + costs.cost(b, d) - d_ba - costs.cost(d, c);
                    if delta < -IMPROVEMENT_EPS && admits(&guard, a, b, c, d) {
                        accept(&mut guard, a, b, c, d);
                        t.reverse(a, d);
                        applied = true;
                        break;
                    }
                }
            }
            if applied {
                moves += 1;
                improved = true;
            }
        }
        if !improved {
            return Ok(TwoOptStats {
                moves,
                local_optimum: true,
            });
        }
    }
}

/// Length change of replacing edges {a,b},{c,d} with {a,c},{b,d}.
fn length_delta(g: &LengthGuard<'_>, a: usize, b: usize, c: usize, d: usize) -> f64 {
    let dist = g.distances;
    dist.cost(a, c) + dist.cost(b, d) - dist.cost(a, b) - dist.cost(c, d)
}

fn admits(guard: &Option<&mut LengthGuard<'_>>, a: usize, b: usize, c: usize, d: usize) -> bool {
    guard
        .as_ref()
        .is_none_or(|g| g.length + length_delta(g, a, b, c, d) <= g.budget + 1e-12)
}

fn accept(guard: &mut Option<&mut LengthGuard<'_>>, a: usize, b: usize, c: usize, d: usize) {
    if let Some(g) = guard.as_mut() {
        g.length += length_delta(g, a, b, c, d);
    }
}

/// Applies `moves` uniformly random 2-opt exchanges regardless of cost.
pub fn random_perturb<R: Rng + ?Sized>(tour: &mut [usize], moves: usize, rng: &mut R) {
    let n = tour.len();
    if n < 4 {
        return;
    }
    for _ in 0..moves {
        // Reverse positions i+1..=j for 0 <= i < j-1, excluding the full wrap.
        loop {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let (i, j) = (i.min(j), i.max(j));
            if j >= i + 2 && !(i == 0 && j == n - 1) {
                tour[i + 1..=j].reverse();
                break;
            }
        }
    }
}

/// Whether any 2-opt exchange strictly improves `tour` under `costs`,
/// checked over all position pairs.
pub fn has_improving_move(tour: &[usize], costs: &CostField) -> bool {
    let n = tour.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b, c, d) = (tour[i], tour[i + 1], tour[j], tour[(j + 1) % n]);
            let delta = costs.cost(a, c) + costs.cost(b, d) - costs.cost(a, b) - costs.cost(c, d);
            if delta < -IMPROVEMENT_EPS {
                return true;
            }
        }
    }
    false
}
