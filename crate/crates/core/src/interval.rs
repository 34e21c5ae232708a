//! The private measure mechanism on the unit interval.
//!
//! A probability measure on an ordered finite set `w_1 <= ... <= w_n` is
//! perturbed atom-by-atom by the scaled superregular walk, which keeps every
//! partial sum of the noise small, and the resulting signed measure is
//! projected back onto probability measures in the `W1` (CDF-`L1`) geometry.
//! On the full interval the input is first quantized onto a uniform net.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::haar::{potential_gap, sample_noise, HaarSystem, SuperregularNoise};
use crate::measure::WeightedMeasure;
use crate::net::{quantize, Net};
use crate::rng::RandomStream;
use crate::space::cube_grid;

#[derive(Debug, Clone)]
pub struct IntervalMechanismResult {
    pub output: WeightedMeasure,
    pub signed_intermediate: WeightedMeasure,
    pub noise: SuperregularNoise,
    pub net: Net,
}

/// Output of the mechanism on a fixed ordered support.
#[derive(Debug, Clone)]
pub struct DiscreteOutcome {
    pub output: WeightedMeasure,
    pub signed_intermediate: WeightedMeasure,
    pub noise: SuperregularNoise,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("alpha must be positive, got {alpha}")))
    }
}

/// Adds the first `weights.len()` increments of a `2^L`-step walk, `2^L` the
/// next power of two. Dropping the trailing increments is a marginal of the
/// full walk and keeps its regularity.
pub(crate) fn perturb_weights(
    weights: &[f64],
    alpha: f64,
    rng: &mut RandomStream,
) -> Result<(Vec<f64>, SuperregularNoise)> {
    check_alpha(alpha)?;
    if weights.is_empty() {
        return Err(Error::arg("cannot perturb an empty measure"));
    }
    let depth = HaarSystem::covering(weights.len())?.depth();
    let noise = sample_noise(depth, alpha, rng)?;
    let perturbed = weights
        .iter()
        .zip(noise.increments())
        .map(|(w, u)| w + u)
        .collect();
    Ok((perturbed, noise))
}

fn sorted_positions(measure: &WeightedMeasure) -> Result<Vec<f64>> {
    let space = measure.space();
    if !space.is_line() {
        return Err(Error::arg("the interval mechanism needs a one-dimensional space"));
    }
    let pos: Vec<f64> = measure
        .support()
        .iter()
        .map(|&p| space.line_coord(p).expect("line space"))
        .collect();
    if pos.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::arg("support must be sorted by coordinate"));
    }
    Ok(pos)
}

/// `A(mu)(w_i) = mu({w_i}) + U_i` with `U = (2/alpha) Z` for the superregular
/// walk `Z`. The support of `mu` must be sorted by coordinate.
pub fn perturb_signed(
    mu: &WeightedMeasure,
    alpha: f64,
    rng: &mut RandomStream,
) -> Result<(WeightedMeasure, SuperregularNoise)> {
    sorted_positions(mu)?;
    let (weights, noise) = perturb_weights(mu.weights(), alpha, rng)?;
    let signed = WeightedMeasure::new(Arc::clone(mu.space()), mu.support().to_vec(), weights)?;
    Ok((signed, noise))
}

/// `sum_k (w_{k+1} - w_k) |C_k - N_k|` with `w_{n+1} = right_end`, where `C`
/// and `N` are running sums of `candidate` and `reference`. This is the line
/// `W1` between the two (possibly signed) measures.
pub fn cdf_objective(positions: &[f64], right_end: f64, candidate: &[f64], reference: &[f64]) -> f64 {
    let n = positions.len();
    let (mut c, mut r, mut total) = (0.0, 0.0, 0.0);
    for k in 0..n {
        c += candidate[k];
        r += reference[k];
        let next = if k + 1 < n { positions[k + 1] } else { right_end };
        total += (next - positions[k]) * (c - r).abs();
    }
    total
}

struct Block {
    len: usize,
    // (value, weight), sorted by value
    items: Vec<(f64, f64)>,
    total: f64,
    level: f64,
}

impl Block {
    fn lower_median(items: &[(f64, f64)], total: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, w) in items {
            acc += w;
            if 2.0 * acc >= total {
                return v;
            }
        }
        items.last().map(|i| i.0).unwrap_or(0.0)
    }

    fn merge(self, other: Block) -> Block {
        let mut items = Vec::with_capacity(self.items.len() + other.items.len());
        let (mut a, mut b) = (self.items.into_iter().peekable(), other.items.into_iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => {
                    if x.0 <= y.0 {
                        items.push(a.next().unwrap());
                    } else {
                        items.push(b.next().unwrap());
                    }
                }
                (Some(_), None) => items.push(a.next().unwrap()),
                (None, Some(_)) => items.push(b.next().unwrap()),
                (None, None) => break,
            }
        }
        let total = self.total + other.total;
        let level = Self::lower_median(&items, total);
        Block {
            len: self.len + other.len,
            items,
            total,
            level,
        }
    }
}

/// Weighted `L1` isotonic regression by pool-adjacent-violators with lower
/// weighted medians. Returns the pointwise smallest nondecreasing minimizer
/// of `sum_k weights_k |c_k - targets_k|`; indices with zero weight take the
/// smallest feasible value (`-inf` before the first weighted index).
pub fn isotonic_l1(targets: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<Block> = Vec::new();
    let mut active = Vec::new();
    for (k, (&t, &w)) in targets.iter().zip(weights).enumerate() {
        if w <= 0.0 {
            continue;
        }
        active.push(k);
        let mut block = Block {
            len: 1,
            items: vec![(t, w)],
            total: w,
            level: t,
        };
        while let Some(prev) = blocks.last() {
            if prev.level <= block.level {
                break;
            }
            let prev = blocks.pop().unwrap();
            block = prev.merge(block);
        }
        blocks.push(block);
    }
    let mut fitted = vec![f64::NEG_INFINITY; targets.len()];
    let mut cursor = 0;
    for block in &blocks {
        for &k in &active[cursor..cursor + block.len] {
            fitted[k] = block.level;
        }
        cursor += block.len;
    }
    for k in 1..fitted.len() {
        if fitted[k] == f64::NEG_INFINITY || weights[k] <= 0.0 {
            fitted[k] = fitted[k - 1];
        }
    }
    fitted
}

/// Probability weights on `positions` closest to `signed` in the line `W1`.
///
/// The cumulative sums `c_1 <= ... <= c_{n-1}` of the answer solve a weighted
/// `L1` isotonic regression onto the running sums of `signed` (weights are the
/// gaps between consecutive positions), clamped to `[0, 1]`; `c_n = 1`. Among
/// several minimizers the lexicographically smallest cumulative vector wins.
pub fn project_weights(positions: &[f64], signed: &[f64]) -> Vec<f64> {
    let n = positions.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut running = 0.0;
    let targets: Vec<f64> = signed[..n - 1]
        .iter()
        .map(|w| {
            running += w;
            running
        })
        .collect();
    let gaps: Vec<f64> = positions.windows(2).map(|w| w[1] - w[0]).collect();
    let cumulative: Vec<f64> = isotonic_l1(&targets, &gaps)
        .into_iter()
        .map(|c| c.clamp(0.0, 1.0))
        .collect();
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &c in &cumulative {
        out.push(c - prev);
        prev = c;
    }
    out.push(1.0 - prev);
    out
}

/// Projects a signed measure on a sorted line support onto probability
/// measures on the same support.
pub fn project_to_probability(nu: &WeightedMeasure) -> Result<WeightedMeasure> {
    if nu.is_empty() {
        return Err(Error::arg("cannot project a measure with empty support"));
    }
    let positions = sorted_positions(nu)?;
    let weights = project_weights(&positions, nu.weights());
    WeightedMeasure::new(Arc::clone(nu.space()), nu.support().to_vec(), weights)
}

/// Perturb-then-project on a fixed sorted support (the input's support).
pub fn private_measure_discrete(
    mu: &WeightedMeasure,
    alpha: f64,
    rng: &mut RandomStream,
) -> Result<DiscreteOutcome> {
    mu.require_probability("input measure")?;
    let (signed, noise) = perturb_signed(mu, alpha, rng)?;
    let output = project_to_probability(&signed)?;
    Ok(DiscreteOutcome {
        output,
        signed_intermediate: signed,
        noise,
    })
}

/// Size `floor(alpha)` of the uniform net used on `[0, 1]`.
pub fn interval_net_size(alpha: f64) -> usize {
    alpha.floor() as usize
}

/// The private measure on `[0, 1]` for `alpha >= 2`.
///
/// The input space is extended by the `floor(alpha)` cell midpoints of a
/// uniform partition of `[0, 1]`; those midpoints form a net of radius
/// `1 / (2 floor(alpha))`. The input is quantized onto the net and passed
/// through [`private_measure_discrete`]. The output lives on the net centers
/// of the extended space.
pub fn private_measure_interval(
    mu: &WeightedMeasure,
    alpha: f64,
    rng: &mut RandomStream,
) -> Result<IntervalMechanismResult> {
    if !(alpha >= 2.0) || !alpha.is_finite() {
        return Err(Error::arg(format!("alpha must be at least 2, got {alpha}")));
    }
    mu.require_probability("input measure")?;
    let space = mu.space();
    let coords = space
        .coords()
        .filter(|_| space.is_line())
        .ok_or_else(|| Error::arg("the interval mechanism needs a one-dimensional space"))?;
    if coords.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::arg("interval inputs must lie in [0, 1]"));
    }
    let n = interval_net_size(alpha);
    let extended = Arc::new(space.with_appended(&cube_grid(1, n))?);
    let first = space.len();
    let net = Net::from_centers(Arc::clone(&extended), (first..first + n).collect(), 0.5 / n as f64)?;
    let quantized = quantize(&mu.rebase(extended)?, &net)?;
    let DiscreteOutcome {
        output,
        signed_intermediate,
        noise,
    } = private_measure_discrete(&quantized, alpha, rng)?;
    Ok(IntervalMechanismResult {
        output,
        signed_intermediate,
        noise,
        net,
    })
}

/// Log of the density ratio of the signed intermediate at `output` under
/// inputs `mu` and `mu_prime` (weight vectors on the same ordered support).
///
/// Vectors shorter than the walk are extended by zeros in the dropped
/// coordinates, which is the conditional density of the full walk; the
/// bound `alpha ||mu - mu'||_TV` for it implies the bound for the marginal.
pub fn log_density_ratio(output: &[f64], mu: &[f64], mu_prime: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if output.len() != mu.len() || mu.len() != mu_prime.len() {
        return Err(Error::arg("weight vectors must have equal length"));
    }
    let haar = HaarSystem::covering(output.len())?;
    let mut x = vec![0.0; haar.len()];
    let mut y = vec![0.0; haar.len()];
    for k in 0..output.len() {
        x[k] = 0.5 * alpha * (output[k] - mu[k]);
        y[k] = 0.5 * alpha * (output[k] - mu_prime[k]);
    }
    potential_gap(&x, &y, &haar)
}
