use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::space::FiniteMetricSpace;

/// Tolerance on total mass and on negative weights when a measure is required
/// to be a probability measure.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// A finitely supported (possibly signed) measure on a [`FiniteMetricSpace`].
///
/// The support may list an index more than once and may carry zero weights;
/// [`WeightedMeasure::compact`] merges both away.
#[derive(Debug, Clone)]
pub struct WeightedMeasure {
    space: Arc<FiniteMetricSpace>,
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedMeasure {
    pub fn new(space: Arc<FiniteMetricSpace>, support: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::arg(format!(
                "support has {} points but {} weights were given",
                support.len(),
                weights.len()
            )));
        }
        if let Some(&bad) = support.iter().find(|&&i| i >= space.len()) {
            return Err(Error::arg(format!(
                "support index {bad} outside a space of {} points",
                space.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::arg("weights must be finite"));
        }
        Ok(WeightedMeasure {
            space,
            support,
            weights,
        })
    }

    pub fn dirac(space: Arc<FiniteMetricSpace>, point: usize) -> Result<Self> {
        Self::new(space, vec![point], vec![1.0])
    }

    /// Empirical measure `(1/n) sum_i delta_{x_i}` of a list of points
    /// (repetitions allowed), with one atom per distinct point.
    pub fn empirical(space: Arc<FiniteMetricSpace>, points: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::arg("empirical measure of an empty dataset"));
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &p in points {
            *counts.entry(p).or_default() += 1;
        }
        let n = points.len() as f64;
        let (support, weights) = counts.into_iter().map(|(p, c)| (p, c as f64 / n)).unzip();
        Self::new(space, support, weights)
    }

    /// Measure with weight `weights[i]` on point `i` of the space.
    pub fn from_dense(space: Arc<FiniteMetricSpace>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::arg("dense weight vector must cover every point"));
        }
        let support = (0..weights.len()).collect();
        Self::new(space, support, weights)
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        self.weights.iter().all(|&w| w >= -PROBABILITY_TOLERANCE)
            && (self.total_mass() - 1.0).abs() <= PROBABILITY_TOLERANCE
    }

    pub(crate) fn require_probability(&self, what: &str) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "{what} must be a probability measure (mass {}, min weight {})",
                self.total_mass(),
                self.weights.iter().copied().fold(f64::INFINITY, f64::min)
            )))
        }
    }

    /// Weight of every point of the space.
    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.space.len()];
        for (p, w) in self.iter() {
            out[p] += w;
        }
        out
    }

    /// Merges repeated indices, drops zero atoms and sorts by point index.
    pub fn compact(&self) -> Self {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (p, w) in self.iter() {
            *merged.entry(p).or_default() += w;
        }
        let (support, weights) = merged.into_iter().filter(|(_, w)| *w != 0.0).unzip();
        WeightedMeasure {
            space: Arc::clone(&self.space),
            support,
            weights,
        }
    }

    /// `||mu||_TV = (1/2) sum |mu({x})|`.
    pub fn tv_norm(&self) -> f64 {
        0.5 * self.compact().weights.iter().map(|w| w.abs()).sum::<f64>()
    }

    /// Same atoms, viewed in a space that extends this one (see
    /// [`FiniteMetricSpace::with_appended`]).
    pub fn rebase(&self, space: Arc<FiniteMetricSpace>) -> Result<Self> {
        if !self.space.is_prefix_of(&space) {
            return Err(Error::arg("target space does not extend the measure's space"));
        }
        Ok(WeightedMeasure {
            space,
            support: self.support.clone(),
            weights: self.weights.clone(),
        })
    }

    pub fn same_space(&self, other: &WeightedMeasure) -> bool {
        Arc::ptr_eq(&self.space, &other.space)
    }
}

/// `||mu - nu||_TV`, half the l1 distance of the weights on the union support.
pub fn tv_distance(mu: &WeightedMeasure, nu: &WeightedMeasure) -> Result<f64> {
    if !mu.same_space(nu) {
        return Err(Error::arg("measures live on different spaces"));
    }
    let mut diff: BTreeMap<usize, f64> = BTreeMap::new();
    for (p, w) in mu.iter() {
        *diff.entry(p).or_default() += w;
    }
    for (p, w) in nu.iter() {
        *diff.entry(p).or_default() -= w;
    }
    Ok(0.5 * diff.values().map(|d| d.abs()).sum::<f64>())
}
