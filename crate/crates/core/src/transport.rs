//! Wasserstein-1 distances: the CDF formula on the line and exact optimal
//! transport on general finite spaces.

use crate::error::{Error, Result};
use crate::measure::WeightedMeasure;

/// Largest combined support accepted by [`wasserstein1_exact`].
pub const MAX_TRANSPORT_SUPPORT: usize = 2000;

const MASS_EPS: f64 = 1e-14;

/// `W1(mu, nu) = int |F_mu - F_nu|` for measures on the line.
///
/// Both measures must live on one-dimensional spaces (not necessarily the same
/// one; atoms are matched by coordinate). Signed measures are accepted and are
/// integrated up to `max(1, rightmost atom)`, so that unequal total masses on
/// `[0, 1]` give the finite pseudometric value.
pub fn wasserstein1_line(mu: &WeightedMeasure, nu: &WeightedMeasure) -> Result<f64> {
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(mu.len() + nu.len());
    for (m, sign) in [(mu, 1.0), (nu, -1.0)] {
        let space = m.space();
        if !space.is_line() {
            return Err(Error::arg("wasserstein1_line needs one-dimensional spaces"));
        }
        for (p, w) in m.iter() {
            events.push((space.line_coord(p).expect("line space"), sign * w));
        }
    }
    if events.is_empty() {
        return Ok(0.0);
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let right = events.last().map(|e| e.0).unwrap_or(1.0).max(1.0);
    let mut total = 0.0;
    let mut cdf_gap = 0.0;
    let mut k = 0;
    while k < events.len() {
        let x = events[k].0;
        while k < events.len() && events[k].0 == x {
            cdf_gap += events[k].1;
            k += 1;
        }
        let next = events.get(k).map(|e| e.0).unwrap_or(right);
        total += (next - x) * cdf_gap.abs();
    }
    Ok(total)
}

/// Exact `W1` between probability measures on a common finite space, solved
/// as a transportation problem by successive shortest paths.
pub fn wasserstein1_exact(mu: &WeightedMeasure, nu: &WeightedMeasure) -> Result<f64> {
    if !mu.same_space(nu) {
        return Err(Error::arg("measures live on different spaces"));
    }
    mu.require_probability("first measure")?;
    nu.require_probability("second measure")?;
    let (a, b) = (mu.compact(), nu.compact());
    let mut union: Vec<usize> = a.support().iter().chain(b.support()).copied().collect();
    union.sort_unstable();
    union.dedup();
    if union.len() > MAX_TRANSPORT_SUPPORT {
        return Err(Error::Resource(format!(
            "combined support {} exceeds the transport guard of {MAX_TRANSPORT_SUPPORT}",
            union.len()
        )));
    }
    let space = mu.space();
    let supply: Vec<f64> = a.weights().iter().map(|w| w.max(0.0)).collect();
    let demand: Vec<f64> = b.weights().iter().map(|w| w.max(0.0)).collect();
    let (src, dst) = (a.support(), b.support());
    Ok(transport_cost(&supply, &demand, |i, j| space.dist(src[i], dst[j])))
}

#[derive(Clone, Copy)]
enum Node {
    Source(usize),
    Sink(usize),
}

/// Minimum cost of shipping `supply` to `demand` on the complete bipartite
/// graph with edge costs `cost(i, j) >= 0`.
///
/// Successive shortest paths with node potentials; each round runs a dense
/// `O(V^2)` Dijkstra over the residual graph (forward edges are uncapacitated,
/// backward edges carry the current flow) and augments along the cheapest
/// path from a source with spare supply to a sink with open demand.
pub(crate) fn transport_cost(supply: &[f64], demand: &[f64], cost: impl Fn(usize, usize) -> f64) -> f64 {
    let (m, k) = (supply.len(), demand.len());
    if m == 0 || k == 0 {
        return 0.0;
    }
    let c: Vec<f64> = (0..m).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| cost(i, j)).collect();
    let mut flow = vec![0.0; m * k];
    let mut rem_s = supply.to_vec();
    let mut rem_d = demand.to_vec();
    let mut pot_s = vec![0.0; m];
    let mut pot_d = vec![0.0; k];
    let scale = supply.iter().sum::<f64>().max(1.0);
    let eps = MASS_EPS * scale;

    let mut dist_s = vec![0.0; m];
    let mut dist_d = vec![0.0; k];
    let mut prev_s: Vec<Option<usize>> = vec![None; m];
    let mut prev_d = vec![0usize; k];
    let mut done_s = vec![false; m];
    let mut done_d = vec![false; k];

    let max_rounds = 50 * (m + k) * (m + k) + 100;
    for _ in 0..max_rounds {
        if rem_s.iter().all(|&r| r <= eps) || rem_d.iter().all(|&r| r <= eps) {
            break;
        }
        for i in 0..m {
            dist_s[i] = if rem_s[i] > eps { 0.0 } else { f64::INFINITY };
            prev_s[i] = None;
            done_s[i] = false;
        }
        dist_d.iter_mut().for_each(|d| *d = f64::INFINITY);
        done_d.iter_mut().for_each(|d| *d = false);

        let mut target = None;
        loop {
            let mut best: Option<(Node, f64)> = None;
            for i in 0..m {
                if !done_s[i] && dist_s[i] < best.map_or(f64::INFINITY, |b| b.1) {
                    best = Some((Node::Source(i), dist_s[i]));
                }
            }
            for j in 0..k {
                if !done_d[j] && dist_d[j] < best.map_or(f64::INFINITY, |b| b.1) {
                    best = Some((Node::Sink(j), dist_d[j]));
                }
            }
            let Some((node, d)) = best else { break };
            match node {
                Node::Source(i) => {
                    done_s[i] = true;
                    for j in 0..k {
                        if done_d[j] {
                            continue;
                        }
                        let nd = d + (c[i * k + j] + pot_s[i] - pot_d[j]).max(0.0);
                        if nd < dist_d[j] {
                            dist_d[j] = nd;
                            prev_d[j] = i;
                        }
                    }
                }
                Node::Sink(j) => {
                    done_d[j] = true;
                    if rem_d[j] > eps {
                        target = Some(j);
                        break;
                    }
                    for i in 0..m {
                        if done_s[i] || flow[i * k + j] <= eps {
                            continue;
                        }
                        let nd = d + (-c[i * k + j] + pot_d[j] - pot_s[i]).max(0.0);
                        if nd < dist_s[i] {
                            dist_s[i] = nd;
                            prev_s[i] = Some(j);
                        }
                    }
                }
            }
        }
        let Some(t) = target else { break };
        let dt = dist_d[t];

        // walk back to the root source, collecting the bottleneck
        let mut bottleneck = rem_d[t];
        let mut j = t;
        let root = loop {
            let i = prev_d[j];
            match prev_s[i] {
                None => break i,
                Some(pj) => {
                    bottleneck = bottleneck.min(flow[i * k + pj]);
                    j = pj;
                }
            }
        };
        bottleneck = bottleneck.min(rem_s[root]);

        let mut j = t;
        loop {
            let i = prev_d[j];
            flow[i * k + j] += bottleneck;
            match prev_s[i] {
                None => break,
                Some(pj) => {
                    flow[i * k + pj] -= bottleneck;
                    if flow[i * k + pj] < eps {
                        flow[i * k + pj] = 0.0;
                    }
                    j = pj;
                }
            }
        }
        rem_s[root] -= bottleneck;
        rem_d[t] -= bottleneck;

        for i in 0..m {
            pot_s[i] += dist_s[i].min(dt);
        }
        for j in 0..k {
            pot_d[j] += dist_d[j].min(dt);
        }
    }
    flow.iter().zip(&c).map(|(f, c)| f * c).sum()
}
