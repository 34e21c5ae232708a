//! Synthetic data: rounding a private measure to an empirical measure, and
//! the differentially private dataset-to-dataset pipeline.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::WeightedMeasure;
use crate::metric::{choose_delta, cube_net, private_measure_on_net, Diagnostics, SpaceKind};
use crate::net::build_net;
use crate::rng::RandomStream;
use crate::space::{FiniteMetricSpace, Metric};

/// Where the data live. The domain decides which net is used, and the net
/// never depends on the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Domain {
    /// `[0, 1]`; points of a one-dimensional coordinate space.
    Interval,
    /// `[0, 1]^dim`; points of a coordinate space of that dimension.
    Cube { dim: usize },
    /// The whole (public) finite space the data are drawn from.
    Generic,
}

/// `n` points of a space, repetitions allowed.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub space: Arc<FiniteMetricSpace>,
    pub points: Vec<usize>,
}

impl Dataset {
    pub fn new(space: Arc<FiniteMetricSpace>, points: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = points.iter().find(|&&p| p >= space.len()) {
            return Err(Error::arg(format!("point index {bad} out of range")));
        }
        Ok(Dataset { space, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn empirical(&self) -> Result<WeightedMeasure> {
        WeightedMeasure::empirical(Arc::clone(&self.space), &self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub epsilon: f64,
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    pub m: usize,
    pub net_size: usize,
    pub tour_length: f64,
    pub accuracy_bound: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub space: Arc<FiniteMetricSpace>,
    pub points: Vec<usize>,
    pub provenance: Option<Provenance>,
}

impl SyntheticDataset {
    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn empirical(&self) -> Result<WeightedMeasure> {
        WeightedMeasure::empirical(Arc::clone(&self.space), &self.points)
    }
}

/// Integer counts `floor(m w_i)` for the positive atoms in point-index order,
/// with the rounding deficit added to the first atom.
pub fn rounded_counts(nu: &WeightedMeasure, m: usize) -> Result<Vec<(usize, usize)>> {
    if m < 1 {
        return Err(Error::arg("m must be at least 1"));
    }
    nu.require_probability("measure")?;
    let atoms = nu.compact();
    let mut counts: Vec<(usize, usize)> = atoms
        .iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(p, w)| (p, (m as f64 * w).floor() as usize))
        .collect();
    if counts.is_empty() {
        return Err(Error::arg("measure has no positive atom"));
    }
    let assigned: usize = counts.iter().map(|c| c.1).sum();
    if assigned > m {
        // only reachable when the weights overshoot 1 within tolerance
        let mut excess = assigned - m;
        for c in counts.iter_mut().rev() {
            let take = excess.min(c.1);
            c.1 -= take;
            excess -= take;
        }
    } else {
        counts[0].1 += m - assigned;
    }
    Ok(counts)
}

/// The empirical measure of `m` points closest (in the sense of the rounding
/// above) to `nu`. The first atom absorbs the rounding error, so `m` should be
/// at least the number of atoms.
pub fn weights_to_empirical(nu: &WeightedMeasure, m: usize) -> Result<SyntheticDataset> {
    let counts = rounded_counts(nu, m)?;
    let points = counts.iter().flat_map(|&(p, c)| std::iter::repeat_n(p, c)).collect();
    Ok(SyntheticDataset {
        space: Arc::clone(nu.space()),
        points,
        provenance: None,
    })
}

/// Smallest `m` with `(r / m) diam <= delta`.
pub fn choose_m(r: usize, diam: f64, delta: f64) -> Result<usize> {
    if !(delta > 0.0) {
        return Err(Error::arg(format!("delta must be positive, got {delta}")));
    }
    Ok(((r as f64 * diam / delta).ceil() as usize).max(1))
}

fn cube_diam(dim: usize, metric: Metric) -> f64 {
    match metric {
        Metric::Chebyshev => 1.0,
        Metric::Euclidean => (dim as f64).sqrt(),
        Metric::Manhattan => dim as f64,
    }
}

/// Differentially private synthetic data.
///
/// Runs the metric mechanism on the empirical measure of `data` with
/// `alpha = epsilon * n` and rounds the result to `m = choose_m(...)` points.
/// `delta` defaults to [`choose_delta`] for the domain.
pub fn dp_synthetic_data(
    data: &Dataset,
    domain: Domain,
    epsilon: f64,
    delta: Option<f64>,
    rng: &mut RandomStream,
) -> Result<SyntheticDataset> {
    if data.is_empty() {
        return Err(Error::arg("dataset is empty"));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    if let Some(d) = delta {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::arg(format!("delta must be positive, got {d}")));
        }
    }
    let n = data.len();
    let alpha = epsilon * n as f64;
    let space = &data.space;
    let (net, diam) = match domain {
        Domain::Interval | Domain::Cube { .. } => {
            let dim = match domain {
                Domain::Cube { dim } => dim,
                _ => 1,
            };
            if space.dim() != Some(dim) {
                return Err(Error::arg(format!("data are not points of dimension {dim}")));
            }
            let kind = if dim == 1 { SpaceKind::Interval } else { SpaceKind::Cube { dim } };
            let delta = match delta {
                Some(d) => d,
                None => choose_delta(kind, alpha)?,
            };
            let metric = space.metric().unwrap_or(Metric::Chebyshev);
            (cube_net(space, delta)?, cube_diam(dim, metric))
        }
        Domain::Generic => {
            let delta = match delta {
                Some(d) => d,
                None => choose_delta(SpaceKind::Generic(space), alpha)?,
            };
            (build_net(Arc::clone(space), delta)?, space.diam())
        }
    };
    let mu = data.empirical()?.rebase(Arc::clone(net.space()))?;
    let result = private_measure_on_net(&mu, alpha, &net, rng)?;
    let Diagnostics {
        delta,
        net_size,
        tour_length,
        accuracy_bound,
        ..
    } = result.diagnostics;
    let r = result.output.compact().len();
    let m = choose_m(r, diam, delta)?;
    let mut synthetic = weights_to_empirical(&result.output, m)?;
    synthetic.provenance = Some(Provenance {
        epsilon,
        n,
        alpha,
        delta,
        m,
        net_size,
        tour_length,
        accuracy_bound,
    });
    Ok(synthetic)
}
