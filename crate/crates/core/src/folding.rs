//! Folding a finite metric space onto an interval: spanning trees, depth-first
//! tours and covering-number bounds on the tour length.

use crate::error::{Error, Result};
use crate::net::greedy_centers;
use crate::space::FiniteMetricSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub root: usize,
    /// `parent[root]` is `None`.
    pub parent: Vec<Option<usize>>,
    pub total_length: f64,
}

impl SpanningTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(v, p)| p.map(|p| (p, v)))
    }

    /// Children of every vertex, sorted by distance to the parent and then by
    /// index.
    fn children(&self, space: &FiniteMetricSpace) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.len()];
        for (p, v) in self.edges() {
            children[p].push(v);
        }
        for (p, c) in children.iter_mut().enumerate() {
            c.sort_by(|&a, &b| space.dist(p, a).total_cmp(&space.dist(p, b)).then(a.cmp(&b)));
        }
        children
    }

    /// Checks that the parent links form a tree spanning `0..len` rooted at
    /// `root`.
    pub fn is_spanning(&self) -> bool {
        let n = self.len();
        if n == 0 || self.root >= n || self.parent[self.root].is_some() {
            return false;
        }
        let mut state = vec![0u8; n];
        state[self.root] = 2;
        for start in 0..n {
            let mut path = Vec::new();
            let mut v = start;
            while state[v] == 0 {
                state[v] = 1;
                path.push(v);
                match self.parent[v] {
                    Some(p) if p < n => v = p,
                    _ => return false,
                }
            }
            if state[v] == 1 {
                return false;
            }
            for u in path {
                state[u] = 2;
            }
        }
        true
    }
}

/// Exact minimum spanning tree of the complete distance graph (Prim, rooted
/// at point 0, ties to the lowest index).
pub fn minimum_spanning_tree(space: &FiniteMetricSpace) -> Result<SpanningTree> {
    let n = space.len();
    if n == 0 {
        return Err(Error::arg("spanning tree of an empty space"));
    }
    let mut parent = vec![None; n];
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut via = vec![0usize; n];
    let mut total = 0.0;
    let mut v = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for u in 0..n {
            if !in_tree[u] {
                let d = space.dist(v, u);
                if d < best[u] {
                    best[u] = d;
                    via[u] = v;
                }
            }
        }
        let mut next = usize::MAX;
        for u in 0..n {
            if !in_tree[u] && (next == usize::MAX || best[u] < best[next]) {
                next = u;
            }
        }
        in_tree[next] = true;
        parent[next] = Some(via[next]);
        total += best[next];
        v = next;
    }
    Ok(SpanningTree {
        root: 0,
        parent,
        total_length: total,
    })
}

/// Spanning tree built from nested greedy nets at scales `2^-j`, together with
/// the level sizes and the covering-sum envelope on its length.
#[derive(Debug, Clone)]
pub struct ChainingTree {
    pub tree: SpanningTree,
    /// `(eps_j, |N_j|)` from the coarsest level (one center) to the first
    /// level that contains every distinct point.
    pub levels: Vec<(f64, usize)>,
    /// `8 sum_j (eps_j - eps_{j+1}) (|N_j| - 1)`, the last level repeated to
    /// infinity.
    pub envelope: f64,
}

/// Chaining construction: the net at scale `eps_{j+1}` is grown greedily from
/// the net at scale `eps_j`, and every new center is connected to its nearest
/// center of the previous level. Points at distance zero from a center are
/// attached to it last.
pub fn chaining_tree(space: &FiniteMetricSpace) -> Result<ChainingTree> {
    let n = space.len();
    if n == 0 {
        return Err(Error::arg("spanning tree of an empty space"));
    }
    let diam = space.diam();
    let mut parent = vec![None; n];
    let mut total = 0.0;
    let mut levels = Vec::new();
    let mut eps = if diam > 0.0 { 2f64.powi(diam.log2().ceil() as i32) } else { 1.0 };
    let mut centers = vec![0];
    levels.push((eps, 1));
    loop {
        let covers_all = (0..n).all(|p| centers.iter().any(|&c| space.dist(p, c) == 0.0));
        if covers_all {
            break;
        }
        let next_eps = eps / 2.0;
        let grown = greedy_centers(space, next_eps, &centers);
        for &v in &grown[centers.len()..] {
            let p = nearest(space, v, &centers);
            parent[v] = Some(p);
            total += space.dist(v, p);
        }
        centers = grown;
        eps = next_eps;
        levels.push((eps, centers.len()));
    }
    let mut is_center = vec![false; n];
    for &c in &centers {
        is_center[c] = true;
    }
    for v in 0..n {
        if !is_center[v] {
            parent[v] = Some(nearest(space, v, &centers));
        }
    }
    let mut envelope = 0.0;
    for (j, &(e, size)) in levels.iter().enumerate() {
        let width = if j + 1 < levels.len() { e - levels[j + 1].0 } else { e };
        envelope += 8.0 * width * (size as f64 - 1.0);
    }
    Ok(ChainingTree {
        tree: SpanningTree {
            root: 0,
            parent,
            total_length: total,
        },
        levels,
        envelope,
    })
}

fn nearest(space: &FiniteMetricSpace, v: usize, centers: &[usize]) -> usize {
    let mut best = centers[0];
    for &c in &centers[1..] {
        let (d, b) = (space.dist(v, c), space.dist(v, best));
        if d < b || (d == b && c < best) {
            best = c;
        }
    }
    best
}

/// A Hamiltonian ordering `z_1, ..., z_n` of the points with positions
/// `x_1 = 0`, `x_{k+1} = x_k + dist(z_k, z_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldingMap {
    pub order: Vec<usize>,
    pub positions: Vec<f64>,
    pub total: f64,
}

impl FoldingMap {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Positions divided by the tour length, so that they lie in `[0, 1]`.
    /// A zero-length tour maps every point to 0.
    pub fn unit_positions(&self) -> Vec<f64> {
        if self.total > 0.0 {
            self.positions.iter().map(|x| x / self.total).collect()
        } else {
            vec![0.0; self.positions.len()]
        }
    }
}

/// Depth-first preorder of the tree (nearest child first), which shortcuts
/// the doubled-tree walk into a Hamiltonian path.
pub fn tour_order(space: &FiniteMetricSpace, tree: &SpanningTree) -> Result<FoldingMap> {
    if tree.len() != space.len() || !tree.is_spanning() {
        return Err(Error::arg("tree does not span the space"));
    }
    let children = tree.children(space);
    let mut order = Vec::with_capacity(space.len());
    let mut stack = vec![tree.root];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(children[v].iter().rev());
    }
    let mut positions = Vec::with_capacity(order.len());
    let mut x = 0.0;
    for (k, &v) in order.iter().enumerate() {
        if k > 0 {
            x += space.dist(order[k - 1], v);
        }
        positions.push(x);
    }
    Ok(FoldingMap {
        order,
        positions,
        total: x,
    })
}

/// Length of the path visiting `order` in sequence.
pub fn path_length(space: &FiniteMetricSpace, order: &[usize]) -> f64 {
    order.windows(2).map(|w| space.dist(w[0], w[1])).sum()
}

/// Greedy covering counts `(x, N(x))` at `x = diam / 2^i`, down to the first
/// scale where every distinct point is its own center.
pub fn covering_profile(space: &FiniteMetricSpace) -> Vec<(f64, usize)> {
    let diam = space.diam();
    if space.len() <= 1 || diam == 0.0 {
        return vec![(diam, 1)];
    }
    let distinct = greedy_centers(space, 0.0, &[]).len();
    let mut out = Vec::new();
    let mut x = diam;
    loop {
        let count = greedy_centers(space, x, &[]).len();
        out.push((x, count));
        if count >= distinct {
            return out;
        }
        x /= 2.0;
    }
}

/// Upper sum for `int_lower^diam N(x) dx` on the dyadic profile.
pub fn covering_integral(space: &FiniteMetricSpace, lower: f64) -> f64 {
    let profile = covering_profile(space);
    let mut total = 0.0;
    for (k, &(x, count)) in profile.iter().enumerate() {
        let below = profile.get(k + 1).map_or(0.0, |p| p.0);
        let lo = below.max(lower);
        if x <= lo {
            break;
        }
        // N is nonincreasing, so the count at the bottom of [below, x] bounds it
        let bottom = profile.get(k + 1).map_or(count, |p| p.1);
        total += (x - lo) * bottom as f64;
    }
    total
}

/// `16 int_0^inf (N(net, x) - 1) dx` for a greedy `delta`-net of the space,
/// with greedy covering counts on a dyadic grid of `x`. Bounds the shortest
/// tour through the net.
pub fn tsp_integral_bound(space: &FiniteMetricSpace, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::arg(format!("delta must be positive, got {delta}")));
    }
    if space.is_empty() {
        return Ok(0.0);
    }
    let centers = greedy_centers(space, delta, &[]);
    let net = space.subspace(&centers)?;
    let profile = covering_profile(&net);
    let mut total = 0.0;
    for (k, &(x, count)) in profile.iter().enumerate() {
        let (below, bottom) = profile.get(k + 1).copied().unwrap_or((0.0, count));
        total += (x - below) * (bottom as f64 - 1.0);
    }
    Ok(16.0 * total)
}
