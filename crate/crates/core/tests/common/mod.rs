//! Independent reference implementations used by the integration and
//! acceptance tests.
#![allow(dead_code)]

use std::sync::Arc;

use privmeasure::{FiniteMetricSpace, Metric, RandomStream, WeightedMeasure};

/// Shortest Hamiltonian cycle by Held–Karp dynamic programming.
#[allow(clippy::needless_range_loop)]
pub fn held_karp(space: &FiniteMetricSpace) -> f64 {
    let n = space.len();
    if n <= 1 {
        return 0.0;
    }
    let full = 1usize << (n - 1);
    // dp[mask][j]: shortest path from 0 through `mask` (over points 1..n) ending at j+1
    let mut dp = vec![vec![f64::INFINITY; n - 1]; full];
    for j in 0..n - 1 {
        dp[1 << j][j] = space.dist(0, j + 1);
    }
    for mask in 1..full {
        for j in 0..n - 1 {
            let cur = dp[mask][j];
            if mask & (1 << j) == 0 || cur.is_infinite() {
                continue;
            }
            for k in 0..n - 1 {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let cand = cur + space.dist(j + 1, k + 1);
                if cand < dp[next][k] {
                    dp[next][k] = cand;
                }
            }
        }
    }
    (0..n - 1)
        .map(|j| dp[full - 1][j] + space.dist(j + 1, 0))
        .fold(f64::INFINITY, f64::min)
}

/// Visits every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Shortest Hamiltonian cycle by scanning all permutations that fix point 0.
pub fn tsp_by_permutations(space: &FiniteMetricSpace) -> f64 {
    let n = space.len();
    if n <= 1 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for_each_permutation(n - 1, |p| {
        let mut len = space.dist(0, p[0] + 1) + space.dist(p[n - 2] + 1, 0);
        for w in p.windows(2) {
            len += space.dist(w[0] + 1, w[1] + 1);
        }
        best = best.min(len);
    });
    best
}

/// `W1` between two uniform measures on `k` atoms each: the cheapest
/// perfect matching divided by `k` (Birkhoff–von Neumann).
pub fn assignment_w1(space: &FiniteMetricSpace, a: &[usize], b: &[usize]) -> f64 {
    let k = a.len();
    let mut best = f64::INFINITY;
    for_each_permutation(k, |p| {
        let cost: f64 = (0..k).map(|i| space.dist(a[i], b[p[i]])).sum();
        best = best.min(cost);
    });
    best / k as f64
}

/// `sum_k g_k |C_k - N_k|` over the first `n - 1` cumulative sums, where
/// `g_k = pos[k+1] - pos[k]`.
pub fn cdf_cost(pos: &[f64], cumulative: &[f64], targets: &[f64]) -> f64 {
    (0..pos.len() - 1)
        .map(|k| (pos[k + 1] - pos[k]) * (cumulative[k] - targets[k]).abs())
        .sum()
}

/// Minimum of the projection objective over nondecreasing cumulative
/// vectors with entries on a grid of step `1/steps` joined with the clamped
/// targets.
pub fn brute_projection_min(pos: &[f64], signed: &[f64], steps: usize) -> f64 {
    let n = pos.len();
    if n == 1 {
        return 0.0;
    }
    let mut targets = Vec::with_capacity(n - 1);
    let mut acc = 0.0;
    for w in &signed[..n - 1] {
        acc += w;
        targets.push(acc);
    }
    let mut values: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    values.extend(targets.iter().map(|t| t.clamp(0.0, 1.0)));
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut best = f64::INFINITY;
    let mut cur = vec![0.0; n - 1];
    fn rec(
        depth: usize,
        start: usize,
        values: &[f64],
        cur: &mut Vec<f64>,
        pos: &[f64],
        targets: &[f64],
        best: &mut f64,
    ) {
        if depth == cur.len() {
            *best = best.min(cdf_cost(pos, cur, targets));
            return;
        }
        for i in start..values.len() {
            cur[depth] = values[i];
            rec(depth + 1, i, values, cur, pos, targets, best);
        }
    }
    rec(0, 0, &values, &mut cur, pos, &targets, &mut best);
    best
}

pub fn random_probability(len: usize, rng: &mut RandomStream) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.uniform_open()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

pub fn random_space(n: usize, dim: usize, metric: Metric, rng: &mut RandomStream) -> Arc<FiniteMetricSpace> {
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.uniform()).collect();
    Arc::new(FiniteMetricSpace::with_coords(dim, coords, metric).unwrap())
}

pub fn random_measure(space: &Arc<FiniteMetricSpace>, rng: &mut RandomStream) -> WeightedMeasure {
    WeightedMeasure::from_dense(Arc::clone(space), random_probability(space.len(), rng)).unwrap()
}

/// Sorted signed weights on sorted random positions.
pub fn random_signed_instance(n: usize, rng: &mut RandomStream) -> (Vec<f64>, Vec<f64>) {
    let mut pos: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    pos.sort_by(f64::total_cmp);
    let signed: Vec<f64> = (0..n).map(|_| (4.0 * rng.uniform() - 1.5) / n as f64).collect();
    (pos, signed)
}
