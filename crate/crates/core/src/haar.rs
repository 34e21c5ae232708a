//! Haar system on the grid `[n]`, `n = 2^L`, and the superregular random walk
//! built from it.
//!
//! The functions are indexed `j = 0..n` (zero-based). Level 0 holds the
//! constant `1/n` (j = 0) and the sign change across the two halves of the
//! grid (j = 1). Level `l >= 1` holds `j = 2^l + p` for `p < 2^l`, supported
//! on the `p`-th dyadic block of length `n / 2^l` and equal to `+2^l/n` on
//! its left half and `-2^l/n` on its right half. Every level-`l` function has
//! squared norm `2^l / n`; the system is orthogonal but not orthonormal.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Largest supported depth; the fast transforms need `O(n)` memory.
pub const MAX_DEPTH: u32 = 24;
/// Largest depth for which the dense `n x n` matrix may be materialized.
pub const MAX_DENSE_DEPTH: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarSystem {
    depth: u32,
}

impl HaarSystem {
    pub fn new(depth: u32) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::Resource(format!(
                "Haar depth {depth} exceeds the guard of {MAX_DEPTH}"
            )));
        }
        Ok(HaarSystem { depth })
    }

    /// Smallest system whose grid holds at least `len` points.
    pub fn covering(len: usize) -> Result<Self> {
        let depth = len.max(1).next_power_of_two().trailing_zeros();
        Self::new(depth)
    }

    /// `L`, with `n = 2^L`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        1usize << self.depth
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Level `l(j)` of function `j`.
    pub fn level(&self, j: usize) -> u32 {
        assert!(j < self.len(), "index {j} out of range");
        if j < 2 {
            0
        } else {
            usize::BITS - 1 - j.leading_zeros()
        }
    }

    /// Number of functions on each level `0..L` (a single level for `L = 0`).
    pub fn level_multiplicities(&self) -> Vec<usize> {
        let mut counts = vec![0; self.depth.max(1) as usize];
        for j in 0..self.len() {
            counts[self.level(j) as usize] += 1;
        }
        counts
    }

    /// Grid cells where function `j` may be nonzero.
    pub fn support(&self, j: usize) -> Range<usize> {
        let n = self.len();
        let l = self.level(j);
        if j < 2 {
            return 0..n;
        }
        let block = n >> l;
        let start = (j - (1 << l)) * block;
        start..start + block
    }

    /// `psi_j(i)`.
    pub fn value(&self, j: usize, i: usize) -> f64 {
        let n = self.len();
        assert!(i < n, "grid index {i} out of range");
        if j == 0 {
            return 1.0 / n as f64;
        }
        let support = self.support(j);
        if !support.contains(&i) {
            return 0.0;
        }
        let height = (1u64 << self.level(j)) as f64 / n as f64;
        let mid = support.start + (support.end - support.start) / 2;
        if i < mid {
            height
        } else {
            -height
        }
    }

    /// Squared norm `2^l / n` of a level-`l` function.
    pub fn norm_sq(&self, j: usize) -> f64 {
        (1u64 << self.level(j)) as f64 / self.len() as f64
    }

    pub fn function(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(j, i)).collect()
    }

    /// Dense matrix with row `j` holding `psi_j`.
    pub fn dense(&self) -> Result<Vec<Vec<f64>>> {
        if self.depth > MAX_DENSE_DEPTH {
            return Err(Error::Resource(format!(
                "dense Haar matrix limited to depth {MAX_DENSE_DEPTH}, got {}",
                self.depth
            )));
        }
        Ok((0..self.len()).map(|j| self.function(j)).collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::arg(format!(
                "vector length {len} does not match Haar grid size {}",
                self.len()
            )));
        }
        Ok(())
    }

    /// Coefficients `lambda(x)_j = (n / 2^l) <psi_j, x>`, so that
    /// `x = sum_j lambda(x)_j psi_j`. Runs in `O(n)` from a pyramid of block
    /// sums: every level-`l >= 1` coefficient is the left-half sum minus the
    /// right-half sum of its block.
    pub fn decompose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let n = self.len();
        let mut coeffs = vec![0.0; n];
        if n == 1 {
            coeffs[0] = x[0];
            return Ok(coeffs);
        }
        // sums holds block sums at the current block size, finest first
        let mut sums: Vec<f64> = x.to_vec();
        let mut level = self.depth;
        while sums.len() > 1 {
            level -= 1;
            let half = sums.len() / 2;
            let mut parent = Vec::with_capacity(half);
            for p in 0..half {
                let (left, right) = (sums[2 * p], sums[2 * p + 1]);
                let j = if level == 0 { 1 } else { (1usize << level) + p };
                coeffs[j] = left - right;
                parent.push(left + right);
            }
            sums = parent;
        }
        coeffs[0] = sums[0];
        Ok(coeffs)
    }

    /// Evaluates `sum_j coeffs_j psi_j` on the grid in `O(n log n)`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let n = self.len();
        let nf = n as f64;
        let mut out = vec![coeffs[0] / nf; n];
        for (j, &c) in coeffs.iter().enumerate().skip(1) {
            if c == 0.0 {
                continue;
            }
            let support = self.support(j);
            let h = c * (1u64 << self.level(j)) as f64 / nf;
            let mid = support.start + (support.end - support.start) / 2;
            out[support.start..mid].iter_mut().for_each(|v| *v += h);
            out[mid..support.end].iter_mut().for_each(|v| *v -= h);
        }
        Ok(out)
    }

    /// Dense-matrix version of [`HaarSystem::decompose`], kept as a
    /// cross-check for small grids.
    pub fn decompose_dense(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let dense = self.dense()?;
        Ok(dense
            .iter()
            .enumerate()
            .map(|(j, psi)| {
                let ip: f64 = psi.iter().zip(x).map(|(a, b)| a * b).sum();
                ip / self.norm_sq(j)
            })
            .collect())
    }

    /// Dense-matrix version of [`HaarSystem::synthesize`].
    pub fn synthesize_dense(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let dense = self.dense()?;
        let mut out = vec![0.0; self.len()];
        for (psi, &c) in dense.iter().zip(coeffs) {
            for (o, v) in out.iter_mut().zip(psi) {
                *o += c * v;
            }
        }
        Ok(out)
    }
}

/// One draw of the superregular walk: Laplace(L+2) coefficients, the grid
/// increments `Z = sum_j lambda_j psi_j`, and the privacy scale `2 / alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperregularNoise {
    pub depth: u32,
    pub lambda: Vec<f64>,
    pub z: Vec<f64>,
    pub scale: f64,
}

impl SuperregularNoise {
    /// Scaled increments `U_i = scale * Z_i`.
    pub fn increments(&self) -> Vec<f64> {
        self.z.iter().map(|z| self.scale * z).collect()
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Laplace scale `L + 2` of the coefficients at depth `L`.
pub fn coefficient_scale(depth: u32) -> f64 {
    f64::from(depth) + 2.0
}

pub fn sample_noise(depth: u32, alpha: f64, rng: &mut RandomStream) -> Result<SuperregularNoise> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::arg(format!("alpha must be positive, got {alpha}")));
    }
    let haar = HaarSystem::new(depth)?;
    let b = coefficient_scale(depth);
    let lambda: Vec<f64> = (0..haar.len()).map(|_| rng.laplace(b)).collect();
    let z = haar.synthesize(&lambda)?;
    Ok(SuperregularNoise {
        depth,
        lambda,
        z,
        scale: 2.0 / alpha,
    })
}

/// Running sums `S_k = U_1 + ... + U_k` of the scaled increments.
pub fn partial_sums(noise: &SuperregularNoise) -> Vec<f64> {
    running_sum(&noise.increments())
}

pub(crate) fn running_sum(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Log of the density ratio `f(x) / f(y)` of the unscaled walk, i.e.
/// `(||lambda(y)||_1 - ||lambda(x)||_1) / (L + 2)`. Regularity of the walk is
/// the statement `|potential_gap(x, y)| <= ||x - y||_1`.
pub fn potential_gap(x: &[f64], y: &[f64], haar: &HaarSystem) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::arg(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let lx: f64 = haar.decompose(x)?.iter().map(|v| v.abs()).sum();
    let ly: f64 = haar.decompose(y)?.iter().map(|v| v.abs()).sum();
    Ok((ly - lx) / coefficient_scale(haar.depth()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_multiplicities_depth_three() {
        let h = HaarSystem::new(3).unwrap();
        assert_eq!(h.len(), 8);
        assert_eq!(h.level_multiplicities(), vec![2, 2, 4]);
    }

    #[test]
    fn depth_zero_is_constant_one() {
        let h = HaarSystem::new(0).unwrap();
        assert_eq!(h.dense().unwrap(), vec![vec![1.0]]);
    }

    #[test]
    fn depth_guard() {
        assert!(matches!(HaarSystem::new(25), Err(Error::Resource(_))));
        assert!(matches!(
            HaarSystem::new(13).unwrap().dense(),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn orthogonal_at_depth_two() {
        let d = HaarSystem::new(2).unwrap().dense().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let ip: f64 = d[i].iter().zip(&d[j]).map(|(a, b)| a * b).sum();
                if i != j {
                    assert_eq!(ip, 0.0, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn functions_reproduce_unit_coefficients() {
        let h = HaarSystem::new(4).unwrap();
        for j in 0..h.len() {
            let lam = h.decompose(&h.function(j)).unwrap();
            for (k, v) in lam.iter().enumerate() {
                let want = if k == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "j={j} k={k} v={v}");
            }
        }
    }

    #[test]
    fn point_indicator_coefficients_are_signs() {
        // n = 8: level 0 contributes two coefficients, levels 1 and 2 one
        // each, so L + 1 = 4 entries are +-1 and the rest vanish.
        let h = HaarSystem::new(3).unwrap();
        for k in 0..8 {
            let mut x = vec![0.0; 8];
            x[k] = 1.0;
            let lam = h.decompose(&x).unwrap();
            let nz: Vec<f64> = lam.iter().copied().filter(|v| *v != 0.0).collect();
            assert_eq!(nz.len(), 4, "k={k}");
            assert!(nz.len() <= 3 + 2);
            assert!(nz.iter().all(|v| v.abs() == 1.0));
        }
    }

    #[test]
    fn zero_decomposes_to_zero() {
        let h = HaarSystem::new(5).unwrap();
        assert!(h.decompose(&[0.0; 32]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn decompose_rejects_wrong_length() {
        let h = HaarSystem::new(3).unwrap();
        assert!(matches!(h.decompose(&[0.0; 7]), Err(Error::Argument(_))));
    }

    #[test]
    fn fast_matches_dense() {
        let mut rng = RandomStream::new(5);
        for depth in 0..=7 {
            let h = HaarSystem::new(depth).unwrap();
            let x: Vec<f64> = (0..h.len()).map(|_| rng.uniform() - 0.5).collect();
            let a = h.decompose(&x).unwrap();
            let b = h.decompose_dense(&x).unwrap();
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() < 1e-12);
            }
            let s = h.synthesize(&a).unwrap();
            let t = h.synthesize_dense(&a).unwrap();
            for ((u, v), w) in s.iter().zip(&t).zip(&x) {
                assert!((u - v).abs() < 1e-12);
                assert!((u - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_sum_prefix_coefficients_are_sparse() {
        // a_kj = <psi_j, 1_[k]> has at most L + 2 nonzero entries per k
        let h = HaarSystem::new(3).unwrap();
        let d = h.dense().unwrap();
        for k in 1..=8 {
            let nz = d
                .iter()
                .filter(|psi| psi[..k].iter().sum::<f64>() != 0.0)
                .count();
            assert!(nz <= 5, "k={k} nz={nz}");
        }
    }

    #[test]
    fn alpha_two_gives_unit_scale() {
        let mut rng = RandomStream::new(9);
        let noise = sample_noise(4, 2.0, &mut rng).unwrap();
        assert_eq!(noise.scale, 1.0);
        assert_eq!(noise.increments(), noise.z);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_noise(6, 3.0, &mut RandomStream::new(42)).unwrap();
        let b = sample_noise(6, 3.0, &mut RandomStream::new(42)).unwrap();
        assert_eq!(a, b);
        let c = sample_noise(6, 3.0, &mut RandomStream::new(43)).unwrap();
        assert_ne!(a.lambda, c.lambda);
    }

    #[test]
    fn sampling_rejects_bad_alpha() {
        let mut rng = RandomStream::new(1);
        assert!(sample_noise(3, 0.0, &mut rng).is_err());
        assert!(sample_noise(3, -1.0, &mut rng).is_err());
        assert!(sample_noise(3, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn noise_z_is_synthesis_of_lambda() {
        let noise = sample_noise(5, 1.0, &mut RandomStream::new(2)).unwrap();
        let h = HaarSystem::new(5).unwrap();
        let lam = h.decompose(&noise.z).unwrap();
        for (a, b) in lam.iter().zip(&noise.lambda) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn partial_sums_examples() {
        let noise = SuperregularNoise {
            depth: 2,
            lambda: vec![0.0; 4],
            z: vec![1.0, -1.0, 0.0, 0.0],
            scale: 1.0,
        };
        assert_eq!(partial_sums(&noise), vec![1.0, 0.0, 0.0, 0.0]);
        let zero = SuperregularNoise {
            z: vec![0.0; 4],
            ..noise
        };
        assert_eq!(partial_sums(&zero), vec![0.0; 4]);
    }

    #[test]
    fn partial_sums_telescope() {
        let noise = sample_noise(8, 0.7, &mut RandomStream::new(8)).unwrap();
        let s = partial_sums(&noise);
        let u = noise.increments();
        let total: f64 = u.iter().sum();
        assert!((s[s.len() - 1] - total).abs() < 1e-12 * total.abs().max(1.0));
        assert_eq!(s[0], u[0]);
        for k in 1..s.len() {
            assert_eq!(s[k], s[k - 1] + u[k]);
        }
    }

    #[test]
    fn potential_gap_examples() {
        let h = HaarSystem::new(3).unwrap();
        let x = vec![0.3, -0.2, 0.0, 1.0, 0.5, 0.5, -1.0, 2.0];
        assert_eq!(potential_gap(&x, &x, &h).unwrap(), 0.0);
        // an indicator has L + 1 = 4 unit coefficients: gap 4 / (L + 2)
        let mut e = vec![0.0; 8];
        e[5] = 1.0;
        let gap = potential_gap(&[0.0; 8], &e, &h).unwrap();
        assert!((gap - 4.0 / 5.0).abs() < 1e-15);
        assert!(gap <= 1.0);
        assert!(potential_gap(&x, &e[..7], &h).is_err());
    }
}
