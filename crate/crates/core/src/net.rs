//! Nets, proximity partitions and quantization onto net centers.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::WeightedMeasure;
use crate::space::FiniteMetricSpace;

/// A set of centers covering a space within `radius`, together with the
/// proximity partition: every point belongs to the cell of its nearest
/// center, ties going to the lowest center index.
#[derive(Debug, Clone)]
pub struct Net {
    space: Arc<FiniteMetricSpace>,
    centers: Vec<usize>,
    radius: f64,
    cell_of: Vec<usize>,
}

impl Net {
    /// Wraps a caller-chosen center set, checking the covering property.
    pub fn from_centers(space: Arc<FiniteMetricSpace>, centers: Vec<usize>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::arg(format!("net radius must be positive, got {radius}")));
        }
        if centers.is_empty() {
            return Err(Error::arg("a net needs at least one center"));
        }
        if let Some(&bad) = centers.iter().find(|&&c| c >= space.len()) {
            return Err(Error::arg(format!("center index {bad} out of range")));
        }
        let mut cell_of = Vec::with_capacity(space.len());
        for p in 0..space.len() {
            let (mut best, mut best_d) = (0, f64::INFINITY);
            for (k, &c) in centers.iter().enumerate() {
                let d = space.dist(p, c);
                if d < best_d {
                    best = k;
                    best_d = d;
                }
            }
            if best_d > radius * (1.0 + 1e-12) {
                return Err(Error::arg(format!(
                    "point {p} is {best_d} from the nearest center, beyond radius {radius}"
                )));
            }
            cell_of.push(best);
        }
        Ok(Net {
            space,
            centers,
            radius,
            cell_of,
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    /// Center point indices, in net order.
    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Position in [`Net::centers`] of the cell containing point `p`.
    pub fn cell_of(&self, p: usize) -> usize {
        self.cell_of[p]
    }
}

/// Farthest-point traversal: starting from `seeds` (or point 0 when empty),
/// repeatedly add the point farthest from the current centers until every
/// point is within `radius`. Added centers are pairwise more than `radius`
/// apart. Ties go to the lowest point index.
pub fn greedy_centers(space: &FiniteMetricSpace, radius: f64, seeds: &[usize]) -> Vec<usize> {
    let n = space.len();
    if n == 0 {
        return Vec::new();
    }
    let mut centers: Vec<usize> = if seeds.is_empty() { vec![0] } else { seeds.to_vec() };
    let mut gap = vec![f64::INFINITY; n];
    for &c in &centers {
        for (p, g) in gap.iter_mut().enumerate() {
            *g = g.min(space.dist(p, c));
        }
    }
    loop {
        let (far, far_d) = gap
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (p, &g)| if g > acc.1 { (p, g) } else { acc });
        if far_d <= radius {
            return centers;
        }
        centers.push(far);
        for (p, g) in gap.iter_mut().enumerate() {
            *g = g.min(space.dist(p, far));
        }
    }
}

/// Greedy `radius`-net of the whole space.
pub fn build_net(space: Arc<FiniteMetricSpace>, radius: f64) -> Result<Net> {
    if space.is_empty() {
        return Err(Error::arg("cannot build a net of an empty space"));
    }
    if !(radius > 0.0) {
        return Err(Error::arg(format!("net radius must be positive, got {radius}")));
    }
    let centers = greedy_centers(&space, radius, &[]);
    Net::from_centers(space, centers, radius)
}

/// Moves the mass of every proximity cell onto its center. The result has
/// one atom per center, in net order (zero atoms included).
pub fn quantize(measure: &WeightedMeasure, net: &Net) -> Result<WeightedMeasure> {
    if !Arc::ptr_eq(measure.space(), net.space()) {
        return Err(Error::arg("measure and net live on different spaces"));
    }
    let mut weights = vec![0.0; net.len()];
    for (p, w) in measure.iter() {
        weights[net.cell_of(p)] += w;
    }
    WeightedMeasure::new(Arc::clone(net.space()), net.centers().to_vec(), weights)
}

/// Upper bound on the covering number `N(space, radius)`: the size of a
/// greedy net.
pub fn covering_number_upper(space: &FiniteMetricSpace, radius: f64) -> usize {
    greedy_centers(space, radius, &[]).len().max(1)
}

/// Lower bound on the packing number: greedy centers are more than `radius`
/// apart, so they form a separated set.
pub fn packing_number_lower(space: &FiniteMetricSpace, radius: f64) -> usize {
    greedy_centers(space, radius, &[]).len().max(1)
}
