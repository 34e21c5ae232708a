use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the symmetry and zero-diagonal checks on explicit matrices.
pub const MATRIX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `max_k |x_k - y_k|`; on one coordinate this is the usual line metric.
    Chebyshev,
    Euclidean,
    Manhattan,
}

#[derive(Clone)]
enum Geometry {
    Coords {
        dim: usize,
        coords: Vec<f64>,
        metric: Metric,
    },
    Matrix {
        dist: Vec<f64>,
    },
}

/// A finite point set with a distance oracle.
///
/// Points either carry coordinates (and a coordinate metric) or come with an
/// explicit distance matrix. The diameter is computed once at construction.
#[derive(Clone)]
pub struct FiniteMetricSpace {
    len: usize,
    geometry: Geometry,
    diam: f64,
}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.geometry {
            Geometry::Coords { dim, metric, .. } => format!("coords(d={dim}, {metric:?})"),
            Geometry::Matrix { .. } => "matrix".to_string(),
        };
        f.debug_struct("FiniteMetricSpace")
            .field("len", &self.len)
            .field("geometry", &kind)
            .field("diam", &self.diam)
            .finish()
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::arg(format!("{what} contains a non-finite value at {pos}")));
    }
    Ok(())
}

impl FiniteMetricSpace {
    /// Points on the real line.
    pub fn line(coords: Vec<f64>) -> Result<Self> {
        Self::with_coords(1, coords, Metric::Chebyshev)
    }

    /// Points in `R^dim`, coordinates stored row-major.
    pub fn with_coords(dim: usize, coords: Vec<f64>, metric: Metric) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("dimension must be at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::arg(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        check_finite(&coords, "coordinates")?;
        let len = coords.len() / dim;
        let mut space = FiniteMetricSpace {
            len,
            geometry: Geometry::Coords { dim, coords, metric },
            diam: 0.0,
        };
        space.diam = space.compute_diam();
        Ok(space)
    }

    /// Explicit symmetric distance matrix, row-major `len x len`.
    pub fn from_matrix(len: usize, dist: Vec<f64>) -> Result<Self> {
        if dist.len() != len * len {
            return Err(Error::arg(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                len * len
            )));
        }
        check_finite(&dist, "distance matrix")?;
        for i in 0..len {
            if dist[i * len + i].abs() > MATRIX_TOLERANCE {
                return Err(Error::input(Some(i + 1), "nonzero diagonal entry"));
            }
            for j in 0..len {
                let (a, b) = (dist[i * len + j], dist[j * len + i]);
                if a < 0.0 {
                    return Err(Error::input(Some(i + 1), format!("negative distance to {j}")));
                }
                if (a - b).abs() > MATRIX_TOLERANCE {
                    return Err(Error::input(
                        Some(i + 1),
                        format!("asymmetric entry ({i},{j}): {a} vs {b}"),
                    ));
                }
            }
        }
        let diam = dist.iter().copied().fold(0.0, f64::max);
        Ok(FiniteMetricSpace {
            len,
            geometry: Geometry::Matrix { dist },
            diam,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn diam(&self) -> f64 {
        self.diam
    }

    /// Coordinate dimension, `None` for matrix-backed spaces.
    pub fn dim(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Coords { dim, .. } => Some(*dim),
            Geometry::Matrix { .. } => None,
        }
    }

    pub fn metric(&self) -> Option<Metric> {
        match &self.geometry {
            Geometry::Coords { metric, .. } => Some(*metric),
            Geometry::Matrix { .. } => None,
        }
    }

    /// True for one-dimensional coordinate spaces.
    pub fn is_line(&self) -> bool {
        self.dim() == Some(1)
    }

    pub fn coord(&self, i: usize) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Coords { dim, coords, .. } => Some(&coords[i * dim..(i + 1) * dim]),
            Geometry::Matrix { .. } => None,
        }
    }

    /// Position of point `i` on the line, for one-dimensional spaces.
    pub fn line_coord(&self, i: usize) -> Option<f64> {
        match &self.geometry {
            Geometry::Coords { dim: 1, coords, .. } => Some(coords[i]),
            _ => None,
        }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Coords { coords, .. } => Some(coords),
            Geometry::Matrix { .. } => None,
        }
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.geometry {
            Geometry::Coords { dim, coords, metric } => {
                let a = &coords[i * dim..(i + 1) * dim];
                let b = &coords[j * dim..(j + 1) * dim];
                let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
                match metric {
                    Metric::Chebyshev => diffs.fold(0.0, f64::max),
                    Metric::Manhattan => diffs.sum(),
                    Metric::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
                }
            }
            Geometry::Matrix { dist } => dist[i * self.len + j],
        }
    }

    fn compute_diam(&self) -> f64 {
        match &self.geometry {
            // the sup-metric diameter is the widest coordinate extent
            Geometry::Coords {
                dim,
                coords,
                metric: Metric::Chebyshev,
            } => (0..*dim)
                .map(|k| {
                    let (lo, hi) = coords
                        .iter()
                        .skip(k)
                        .step_by(*dim)
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                            (lo.min(v), hi.max(v))
                        });
                    if lo.is_finite() {
                        hi - lo
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max),
            _ => {
                let mut diam: f64 = 0.0;
                for i in 0..self.len {
                    for j in i + 1..self.len {
                        diam = diam.max(self.dist(i, j));
                    }
                }
                diam
            }
        }
    }

    /// The sub-space spanned by `indices`, re-indexed `0..indices.len()`.
    pub fn subspace(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len) {
            return Err(Error::arg(format!("index {bad} out of range")));
        }
        match &self.geometry {
            Geometry::Coords { dim, metric, .. } => {
                let mut coords = Vec::with_capacity(indices.len() * dim);
                for &i in indices {
                    coords.extend_from_slice(self.coord(i).expect("coordinate space"));
                }
                Self::with_coords(*dim, coords, *metric)
            }
            Geometry::Matrix { .. } => {
                let k = indices.len();
                let mut dist = Vec::with_capacity(k * k);
                for &i in indices {
                    for &j in indices {
                        dist.push(self.dist(i, j));
                    }
                }
                Self::from_matrix(k, dist)
            }
        }
    }

    /// A new coordinate space holding these points followed by `extra`
    /// (row-major, same dimension). Indices of existing points are kept.
    pub fn with_appended(&self, extra: &[f64]) -> Result<Self> {
        match &self.geometry {
            Geometry::Coords { dim, coords, metric } => {
                let mut all = coords.clone();
                all.extend_from_slice(extra);
                Self::with_coords(*dim, all, *metric)
            }
            Geometry::Matrix { .. } => Err(Error::arg(
                "cannot append coordinates to a matrix-backed space",
            )),
        }
    }

    /// Whether `other` starts with exactly the points of `self`.
    pub fn is_prefix_of(&self, other: &FiniteMetricSpace) -> bool {
        if other.len < self.len {
            return false;
        }
        match (&self.geometry, &other.geometry) {
            (
                Geometry::Coords { dim, coords, metric },
                Geometry::Coords {
                    dim: d2,
                    coords: c2,
                    metric: m2,
                },
            ) => dim == d2 && metric == m2 && c2[..coords.len()] == coords[..],
            (Geometry::Matrix { .. }, Geometry::Matrix { .. }) => (0..self.len)
                .all(|i| (0..self.len).all(|j| self.dist(i, j) == other.dist(i, j))),
            _ => false,
        }
    }
}

/// Midpoints `(i + 1/2) / k` of a uniform `k`-cell partition of `[0, 1]^dim`,
/// row-major with the last coordinate varying fastest.
pub fn cube_grid(dim: usize, k: usize) -> Vec<f64> {
    let count = k.pow(dim as u32);
    let mut coords = Vec::with_capacity(count * dim);
    for idx in 0..count {
        let mut rest = idx;
        let mut point = vec![0.0; dim];
        for slot in point.iter_mut().rev() {
            *slot = ((rest % k) as f64 + 0.5) / k as f64;
            rest /= k;
        }
        coords.extend(point);
    }
    coords
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn chebyshev_diameter_matches_pairwise_scan() {
        let mut rng = RandomStream::new(4);
        let coords: Vec<f64> = (0..60).map(|_| rng.uniform()).collect();
        let s = FiniteMetricSpace::with_coords(3, coords, Metric::Chebyshev).unwrap();
        let mut brute: f64 = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                brute = brute.max(s.dist(i, j));
            }
        }
        assert_eq!(s.diam(), brute);
    }

    #[test]
    fn metric_axioms_spot_check() {
        let mut rng = RandomStream::new(8);
        for metric in [Metric::Chebyshev, Metric::Euclidean, Metric::Manhattan] {
            let coords: Vec<f64> = (0..40).map(|_| rng.uniform()).collect();
            let s = FiniteMetricSpace::with_coords(2, coords, metric).unwrap();
            for _ in 0..200 {
                let (i, j, k) = (rng.index(20), rng.index(20), rng.index(20));
                assert_eq!(s.dist(i, i), 0.0);
                assert_eq!(s.dist(i, j), s.dist(j, i));
                assert!(s.dist(i, k) <= s.dist(i, j) + s.dist(j, k) + 1e-12);
            }
        }
    }

    #[test]
    fn matrix_validation() {
        let ok = FiniteMetricSpace::from_matrix(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(ok.diam(), 1.0);
        let asym = FiniteMetricSpace::from_matrix(2, vec![0.0, 1.0, 1.001, 0.0]);
        assert!(matches!(asym, Err(Error::Input { row: Some(1), .. })));
        let diag = FiniteMetricSpace::from_matrix(2, vec![0.5, 1.0, 1.0, 0.0]);
        assert!(diag.is_err());
        assert!(FiniteMetricSpace::from_matrix(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn subspace_keeps_distances() {
        let s = FiniteMetricSpace::line(vec![0.0, 0.25, 0.75, 1.0]).unwrap();
        let sub = s.subspace(&[3, 1]).unwrap();
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.dist(0, 1), 0.75);
        let m = FiniteMetricSpace::from_matrix(3, vec![0., 1., 2., 1., 0., 1., 2., 1., 0.]).unwrap();
        assert_eq!(m.subspace(&[0, 2]).unwrap().dist(0, 1), 2.0);
    }

    #[test]
    fn appended_space_extends_prefix() {
        let s = FiniteMetricSpace::line(vec![0.1, 0.9]).unwrap();
        let e = s.with_appended(&[0.5]).unwrap();
        assert!(s.is_prefix_of(&e));
        assert!(!e.is_prefix_of(&s));
        assert_eq!(e.line_coord(2), Some(0.5));
    }

    #[test]
    fn grid_layout() {
        assert_eq!(cube_grid(1, 2), vec![0.25, 0.75]);
        let g = cube_grid(2, 2);
        assert_eq!(g, vec![0.25, 0.25, 0.25, 0.75, 0.75, 0.25, 0.75, 0.75]);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(FiniteMetricSpace::line(vec![0.0, f64::NAN]).is_err());
    }
}
