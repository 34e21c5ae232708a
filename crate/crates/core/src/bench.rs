//! Monte-Carlo experiments: walk boundedness, accuracy sweeps and the
//! regularity audit. Every trial draws from its own stream derived from the
//! seed, so results do not depend on scheduling.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::haar::{coefficient_scale, potential_gap, sample_noise, HaarSystem};
use crate::interval::private_measure_interval;
use crate::measure::WeightedMeasure;
use crate::metric::{accuracy_bound, choose_delta, cube_net, fold_net, private_measure_on_net, SpaceKind};
use crate::rng::RandomStream;
use crate::space::{cube_grid, FiniteMetricSpace, Metric};
use crate::synth::{dp_synthetic_data, Dataset, Domain};
use crate::transport::{wasserstein1_exact, wasserstein1_line};

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn row_seed(seed: u64, row: usize) -> u64 {
    seed.wrapping_add((row as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn run_trials<F>(seed: u64, row: usize, trials: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut RandomStream) -> Result<f64> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(&mut RandomStream::for_trial(row_seed(seed, row), t as u64)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkRow {
    pub n: usize,
    pub mean_max: f64,
    pub std_err: f64,
    /// `mean_max / ln^2 n`
    pub per_log2: f64,
    pub iid_mean_max: f64,
    pub iid_std_err: f64,
    /// `iid_mean_max / sqrt n`
    pub iid_per_sqrt: f64,
    /// `(1/8) ln n`
    pub floor: f64,
}

fn max_abs_prefix(steps: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut best = 0.0f64;
    for x in steps {
        s += x;
        best = best.max(s.abs());
    }
    best
}

/// `E max_k |S_k|` of the unscaled superregular walk and of a walk with
/// i.i.d. Laplace(L+2) steps, for `n = 2^L`.
pub fn walk_boundedness(depths: &[u32], trials: usize, seed: u64) -> Result<Vec<WalkRow>> {
    if trials == 0 {
        return Err(Error::arg("trials must be at least 1"));
    }
    let mut rows = Vec::new();
    for (row, &depth) in depths.iter().enumerate() {
        let n = HaarSystem::new(depth)?.len();
        let b = coefficient_scale(depth);
        let pairs: Vec<(f64, f64)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = RandomStream::for_trial(row_seed(seed, row), t as u64);
                let noise = sample_noise(depth, 2.0, &mut rng)?;
                let sup = max_abs_prefix(noise.z.iter().copied());
                let iid = max_abs_prefix((0..n).map(|_| rng.laplace(b)));
                Ok((sup, iid))
            })
            .collect::<Result<_>>()?;
        let (sup, iid): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (mean_max, std_err) = mean_and_std_err(&sup);
        let (iid_mean_max, iid_std_err) = mean_and_std_err(&iid);
        let ln = (n as f64).ln();
        rows.push(WalkRow {
            n,
            mean_max,
            std_err,
            per_log2: if n > 1 { mean_max / (ln * ln) } else { f64::NAN },
            iid_mean_max,
            iid_std_err,
            iid_per_sqrt: iid_mean_max / (n as f64).sqrt(),
            floor: ln / 8.0,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyRow {
    /// The swept parameter (`alpha` or `n`).
    pub param: f64,
    pub mean: f64,
    pub std: f64,
    pub std_err: f64,
    /// Theory-shaped bound with unit constant (see the experiment docs).
    pub bound: f64,
    /// `c param^{-1/d}` with `c` matched at the largest parameter.
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub experiment: String,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<AccuracyRow>,
    pub slope: f64,
}

impl BenchReport {
    fn build(experiment: &str, dim: usize, trials: usize, seed: u64, raw: Vec<(f64, Vec<f64>, f64)>) -> Self {
        let mut rows: Vec<AccuracyRow> = raw
            .into_iter()
            .map(|(param, values, bound)| {
                let (mean, std_err) = mean_and_std_err(&values);
                AccuracyRow {
                    param,
                    mean,
                    std: std_err * (values.len() as f64).sqrt(),
                    std_err,
                    bound,
                    reference: 0.0,
                }
            })
            .collect();
        rows.sort_by(|a, b| a.param.total_cmp(&b.param));
        let power = 1.0 / dim as f64;
        if let Some(last) = rows.last() {
            let c = last.mean * last.param.powf(power);
            for r in rows.iter_mut() {
                r.reference = c * r.param.powf(-power);
            }
        }
        let xs: Vec<f64> = rows.iter().map(|r| r.param).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.mean).collect();
        BenchReport {
            experiment: experiment.to_string(),
            dim,
            trials,
            seed,
            slope: loglog_slope(&xs, &ys),
            rows,
        }
    }

    /// `mean / bound` per row.
    pub fn fitted_constants(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean / r.bound).collect()
    }

    /// Whether every mean is at least the reference curve.
    pub fn above_reference(&self) -> bool {
        self.rows.iter().all(|r| r.mean >= r.reference * (1.0 - 1e-12))
    }
}

fn random_probability(len: usize, rng: &mut RandomStream) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.uniform_open()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// `E W1(output, input)` of the interval mechanism over random inputs with
/// `atoms` uniform atoms in `[0, 1]`. The bound column is
/// `log^{3/2}(alpha) / alpha`.
pub fn interval_accuracy(alphas: &[f64], trials: usize, seed: u64, atoms: usize) -> Result<BenchReport> {
    if trials == 0 || atoms == 0 {
        return Err(Error::arg("trials and atoms must be at least 1"));
    }
    let mut raw = Vec::new();
    for (row, &alpha) in alphas.iter().enumerate() {
        let values = run_trials(seed, row, trials, |rng| {
            let coords: Vec<f64> = (0..atoms).map(|_| rng.uniform()).collect();
            let space = Arc::new(FiniteMetricSpace::line(coords)?);
            let mu = WeightedMeasure::from_dense(space, random_probability(atoms, rng))?;
            let r = private_measure_interval(&mu, alpha, rng)?;
            wasserstein1_line(&r.output, &mu)
        })?;
        raw.push((alpha, values, alpha.ln().powf(1.5) / alpha));
    }
    Ok(BenchReport::build("interval", 1, trials, seed, raw))
}

/// The `ground^dim` grid of cell midpoints, with the sup metric.
pub fn ground_grid(dim: usize, ground: usize) -> Result<Arc<FiniteMetricSpace>> {
    Ok(Arc::new(FiniteMetricSpace::with_coords(dim, cube_grid(dim, ground), Metric::Chebyshev)?))
}

/// `E W1(output, input)` of the metric mechanism on `[0,1]^dim` with the
/// resolution from [`choose_delta`]. Inputs are random measures on a fixed
/// ground grid so that `W1` can be computed exactly. The bound column is the
/// mean of the per-run accuracy bound.
pub fn cube_accuracy(dim: usize, alphas: &[f64], trials: usize, seed: u64, ground: usize) -> Result<BenchReport> {
    if trials == 0 {
        return Err(Error::arg("trials must be at least 1"));
    }
    let grid = ground_grid(dim, ground)?;
    let mut raw = Vec::new();
    for (row, &alpha) in alphas.iter().enumerate() {
        let net = cube_net(&grid, choose_delta(SpaceKind::Cube { dim }, alpha)?)?;
        let tour = fold_net(&net)?.0.total;
        let bound = accuracy_bound(alpha, net.radius(), net.len(), tour);
        let values = run_trials(seed, row, trials, |rng| {
            let weights = random_probability(grid.len(), rng);
            let mu = WeightedMeasure::from_dense(Arc::clone(net.space()), {
                let mut w = weights;
                w.resize(net.space().len(), 0.0);
                w
            })?;
            let r = private_measure_on_net(&mu, alpha, &net, rng)?;
            wasserstein1_exact(&r.output, &mu)
        })?;
        raw.push((alpha, values, bound));
    }
    Ok(BenchReport::build("cube", dim, trials, seed, raw))
}

/// `E W1(mu_Y, mu_X)` of the synthetic-data pipeline on `[0,1]^dim` with
/// privacy `epsilon`, for datasets of `n` uniform points of the ground grid.
/// The bound column is `3 delta + log^{3/2}(net size) * tour / (epsilon n)`.
pub fn synth_accuracy(
    dim: usize,
    ns: &[usize],
    epsilon: f64,
    trials: usize,
    seed: u64,
    ground: usize,
) -> Result<BenchReport> {
    if trials == 0 {
        return Err(Error::arg("trials must be at least 1"));
    }
    let grid = ground_grid(dim, ground)?;
    let mut raw = Vec::new();
    for (row, &n) in ns.iter().enumerate() {
        let results = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = RandomStream::for_trial(row_seed(seed, row), t as u64);
                let points: Vec<usize> = (0..n).map(|_| rng.index(grid.len())).collect();
                let data = Dataset::new(Arc::clone(&grid), points)?;
                let y = dp_synthetic_data(&data, Domain::Cube { dim }, epsilon, None, &mut rng)?;
                let mu_x = data.empirical()?.rebase(Arc::clone(&y.space))?;
                let p = y.provenance.clone().expect("pipeline records provenance");
                Ok((wasserstein1_exact(&y.empirical()?, &mu_x)?, p.accuracy_bound + p.delta))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let bound = results.first().map_or(0.0, |r| r.1);
        raw.push((n as f64, results.into_iter().map(|r| r.0).collect(), bound));
    }
    Ok(BenchReport::build("synth", dim, trials, seed, raw))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditWitness {
    pub depth: u32,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub gap: f64,
    pub l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub depths: Vec<u32>,
    pub pairs_per_depth: usize,
    pub seed: u64,
    pub checked: usize,
    /// Largest `|gap| - ||x - y||_1` seen.
    pub max_excess: f64,
    pub witness: Option<AuditWitness>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks `|potential_gap(x, y)| <= ||x - y||_1 + slack` on random pairs.
///
/// Pairs mix dense Gaussian-like vectors, sparse perturbations and identical
/// vectors. `gap_multiplier` scales the computed gap before the check; it is
/// 1 in normal use and lets tests inject a faulty potential.
pub fn audit_regularity(
    depths: &[u32],
    pairs_per_depth: usize,
    seed: u64,
    slack: f64,
    gap_multiplier: f64,
) -> Result<AuditReport> {
    let mut checked = 0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut witness = None;
    for (row, &depth) in depths.iter().enumerate() {
        let haar = HaarSystem::new(depth)?;
        let n = haar.len();
        let mut rng = RandomStream::new(row_seed(seed, row));
        for k in 0..pairs_per_depth {
            let x: Vec<f64> = (0..n).map(|_| rng.uniform() * 2.0 - 1.0).collect();
            let y: Vec<f64> = match k % 3 {
                0 => (0..n).map(|_| rng.uniform() * 2.0 - 1.0).collect(),
                1 => {
                    let mut y = x.clone();
                    let i = rng.index(n);
                    y[i] += rng.laplace(1.0);
                    y
                }
                _ => x.clone(),
            };
            let gap = gap_multiplier * potential_gap(&x, &y, &haar)?;
            let l1: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
            let excess = gap.abs() - l1;
            checked += 1;
            max_excess = max_excess.max(excess);
            if excess > slack && witness.is_none() {
                witness = Some(AuditWitness { depth, x, y, gap, l1 });
            }
        }
    }
    Ok(AuditReport {
        depths: depths.to_vec(),
        pairs_per_depth,
        seed,
        checked,
        max_excess,
        witness,
    })
}
