//! Node (dis)similarity matrices of a transition network.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::networks::TransitionNetwork;
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// Hop count of a fewest-edges path.
    UnweightedShortest,
    /// Sum of weights along the reciprocal-weight optimal path.
    WeightedShortest,
    /// Hop count of the reciprocal-weight optimal path.
    ShortestWeighted,
    /// Degree-normalized distance between lazy random-walk distributions.
    Diffusion,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 4] = [
        DistanceKind::UnweightedShortest,
        DistanceKind::ShortestWeighted,
        DistanceKind::WeightedShortest,
        DistanceKind::Diffusion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::UnweightedShortest => "unweighted",
            DistanceKind::WeightedShortest => "weighted-shortest",
            DistanceKind::ShortestWeighted => "shortest-weighted",
            DistanceKind::Diffusion => "diffusion",
        }
    }
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unweighted" | "unweighted-shortest" => Ok(DistanceKind::UnweightedShortest),
            "weighted-shortest" => Ok(DistanceKind::WeightedShortest),
            "shortest-weighted" => Ok(DistanceKind::ShortestWeighted),
            "diffusion" => Ok(DistanceKind::Diffusion),
            other => Err(Error::InvalidInput(format!(
                "unknown distance kind `{other}`"
            ))),
        }
    }
}

/// Symmetric, zero-diagonal, non-negative node dissimilarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
    kind: Option<DistanceKind>,
    diffusion_t: Option<usize>,
}

impl DissimilarityMatrix {
    /// Wraps a row-major square matrix after checking symmetry, a zero
    /// diagonal and non-negative finite entries.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidInput(format!("bad entry {v} at ({i}, {j})")));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DissimilarityMatrix {
            n,
            values,
            kind: None,
            diffusion_t: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> Option<DistanceKind> {
        self.kind
    }

    pub fn diffusion_t(&self) -> Option<usize> {
        self.diffusion_t
    }

    /// Multiplies every entry by `alpha > 0`.
    pub fn scaled(&self, alpha: f64) -> Self {
        DissimilarityMatrix {
            values: self.values.iter().map(|v| v * alpha).collect(),
            ..self.clone()
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        for i in 0..self.n {
            wtr.write_record(self.row(i).iter().map(|v| v.to_string()))
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Provenance sidecar for the CSV export.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "size": self.n,
            "kind": self.kind.map(DistanceKind::as_str),
            "diffusion_t": self.diffusion_t,
        })
    }
}

/// Default diffusion step count `ceil(log2 N) + 1`.
pub fn default_diffusion_t(node_count: usize) -> usize {
    (node_count.max(1) as f64).log2().ceil() as usize + 1
}

pub fn compute_distance(
    net: &TransitionNetwork,
    kind: DistanceKind,
    diffusion_t: Option<usize>,
    exec: Execution,
) -> Result<DissimilarityMatrix> {
    match kind {
        DistanceKind::UnweightedShortest => Ok(unweighted_shortest_path(net, exec)),
        DistanceKind::WeightedShortest => Ok(weighted_shortest_path(net, exec)),
        DistanceKind::ShortestWeighted => Ok(shortest_weighted_path(net, exec)),
        DistanceKind::Diffusion => {
            let t = diffusion_t.unwrap_or_else(|| default_diffusion_t(net.node_count()));
            diffusion_distance(net, t, exec)
        }
    }
}

fn bfs_hops(net: &TransitionNetwork, source: usize) -> Vec<f64> {
    let n = net.node_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in net.neighbors(u) {
            if dist[v].is_infinite() {
                dist[v] = dist[u] + 1.0;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// All-pairs hop distances.
pub fn unweighted_shortest_path(net: &TransitionNetwork, exec: Execution) -> DissimilarityMatrix {
    let n = net.node_count();
    let rows = par::map_range(exec, n, |s| bfs_hops(net, s));
    DissimilarityMatrix {
        n,
        values: rows.concat(),
        kind: Some(DistanceKind::UnweightedShortest),
        diffusion_t: None,
    }
}

/// All-pairs optimal paths under the reciprocal cost `sum 1 / w(e)`.
///
/// Among paths of equal reciprocal cost the one with fewer hops wins, then
/// the lexicographically smallest node sequence. The path reported for an
/// unordered pair always starts at the smaller node index, so both derived
/// matrices are symmetric.
#[derive(Debug, Clone)]
pub struct ReciprocalPaths {
    n: usize,
    cost: Vec<f64>,
    hops: Vec<u32>,
    weight_sum: Vec<u64>,
    /// `next[target * n + node]`: successor of `node` on its path to `target`.
    next: Vec<u32>,
}

impl ReciprocalPaths {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Minimal reciprocal cost between `a` and `b`.
    pub fn cost(&self, a: usize, b: usize) -> f64 {
        self.cost[b * self.n + a]
    }

    /// Hop count of the chosen path.
    pub fn hops(&self, a: usize, b: usize) -> usize {
        self.hops[b * self.n + a] as usize
    }

    /// Sum of edge weights along the chosen path between `a` and `b`.
    pub fn weight_sum(&self, a: usize, b: usize) -> u64 {
        let (s, t) = (a.min(b), a.max(b));
        self.weight_sum[t * self.n + s]
    }

    /// Node sequence of the chosen path, from `min(a, b)` to `max(a, b)`.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut cur, target) = (a.min(b), a.max(b));
        let mut path = vec![cur];
        while cur != target {
            cur = self.next[target * self.n + cur] as usize;
            path.push(cur);
        }
        path
    }
}

const COST_RTOL: f64 = 1e-10;

fn cost_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_RTOL * (1.0 + a.abs().max(b.abs()))
}

/// Strict (cost, hops) improvement with a tolerant cost comparison.
fn improves(cost: f64, hops: u32, best_cost: f64, best_hops: u32) -> bool {
    if cost_eq(cost, best_cost) {
        hops < best_hops
    } else {
        cost < best_cost
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    hops: u32,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct TargetTree {
    cost: Vec<f64>,
    hops: Vec<u32>,
    weight_sum: Vec<u64>,
    next: Vec<u32>,
}

fn reciprocal_tree(net: &TransitionNetwork, target: usize) -> TargetTree {
    let n = net.node_count();
    let mut cost = vec![f64::INFINITY; n];
    let mut hops = vec![u32::MAX; n];
    let mut done = vec![false; n];
    cost[target] = 0.0;
    hops[target] = 0;
    let mut heap = BinaryHeap::from([HeapEntry {
        cost: 0.0,
        hops: 0,
        node: target,
    }]);
    while let Some(HeapEntry { node: u, .. }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in net.neighbors(u) {
            if done[v] {
                continue;
            }
            let c = cost[u] + 1.0 / w as f64;
            let h = hops[u] + 1;
            if improves(c, h, cost[v], hops[v]) {
                cost[v] = c;
                hops[v] = h;
                heap.push(HeapEntry {
                    cost: c,
                    hops: h,
                    node: v,
                });
            }
        }
    }

    // Walk outward by hop count: each node steps to its smallest neighbour
    // that continues an optimal path, which yields the lexicographically
    // smallest optimal node sequence toward the target.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| hops[v]);
    let mut next = vec![target as u32; n];
    let mut weight_sum = vec![0u64; n];
    for &x in order.iter().skip(1) {
        let step = net
            .neighbors(x)
            .iter()
            .find(|&&(y, w)| hops[y] + 1 == hops[x] && cost_eq(cost[y] + 1.0 / w as f64, cost[x]))
            .copied()
            .expect("optimal predecessor exists on a connected graph");
        next[x] = step.0 as u32;
        weight_sum[x] = weight_sum[step.0] + step.1;
    }
    TargetTree {
        cost,
        hops,
        weight_sum,
        next,
    }
}

pub fn reciprocal_optimal_paths(net: &TransitionNetwork, exec: Execution) -> ReciprocalPaths {
    let n = net.node_count();
    let trees = par::map_range(exec, n, |t| reciprocal_tree(net, t));
    let mut out = ReciprocalPaths {
        n,
        cost: Vec::with_capacity(n * n),
        hops: Vec::with_capacity(n * n),
        weight_sum: Vec::with_capacity(n * n),
        next: Vec::with_capacity(n * n),
    };
    for tree in trees {
        out.cost.extend(tree.cost);
        out.hops.extend(tree.hops);
        out.weight_sum.extend(tree.weight_sum);
        out.next.extend(tree.next);
    }
    out
}

fn from_paths(paths: &ReciprocalPaths, kind: DistanceKind) -> DissimilarityMatrix {
    let n = paths.size();
    let mut values = vec![0.0; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let v = match kind {
                DistanceKind::WeightedShortest => paths.weight_sum(a, b) as f64,
                _ => paths.hops(a, b) as f64,
            };
            values[a * n + b] = v;
            values[b * n + a] = v;
        }
    }
    DissimilarityMatrix {
        n,
        values,
        kind: Some(kind),
        diffusion_t: None,
    }
}

/// Sum of weights along the reciprocal-weight optimal path.
pub fn weighted_shortest_path(net: &TransitionNetwork, exec: Execution) -> DissimilarityMatrix {
    from_paths(
        &reciprocal_optimal_paths(net, exec),
        DistanceKind::WeightedShortest,
    )
}

/// Hop count of the reciprocal-weight optimal path.
pub fn shortest_weighted_path(net: &TransitionNetwork, exec: Execution) -> DissimilarityMatrix {
    from_paths(
        &reciprocal_optimal_paths(net, exec),
        DistanceKind::ShortestWeighted,
    )
}

/// Row-stochastic random-walk matrix `P(i, j) = A(i, j) / sum_k A(i, k)`.
pub fn transition_matrix(net: &TransitionNetwork) -> Vec<f64> {
    let n = net.node_count();
    let deg = net.weighted_degrees();
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for &(j, w) in net.neighbors(i) {
            p[i * n + j] = w as f64 / deg[i] as f64;
        }
    }
    p
}

/// `t`-step lazy walk matrix `((P + I) / 2)^t`, dense row-major.
pub fn lazy_walk_power(net: &TransitionNetwork, t: usize, exec: Execution) -> Vec<f64> {
    let n = net.node_count();
    let deg = net.weighted_degrees();
    let mut cur = vec![0.0; n * n];
    for i in 0..n {
        cur[i * n + i] = 1.0;
    }
    let mut nxt = vec![0.0; n * n];
    for _ in 0..t {
        let prev = &cur;
        par::for_each_row_mut(exec, &mut nxt, n, |i, row| {
            let half = 0.5;
            for (r, p) in row.iter_mut().zip(&prev[i * n..(i + 1) * n]) {
                *r = half * p;
            }
            for &(j, w) in net.neighbors(i) {
                let pij = half * w as f64 / deg[i] as f64;
                for (r, p) in row.iter_mut().zip(&prev[j * n..(j + 1) * n]) {
                    *r += pij * p;
                }
            }
        });
        std::mem::swap(&mut cur, &mut nxt);
    }
    cur
}

/// Diffusion distance after `t` lazy random-walk steps, normalized by the
/// weighted degree of each target node.
pub fn diffusion_distance(
    net: &TransitionNetwork,
    t: usize,
    exec: Execution,
) -> Result<DissimilarityMatrix> {
    if t == 0 {
        return Err(Error::InvalidInput(
            "diffusion step count must be at least 1".into(),
        ));
    }
    let n = net.node_count();
    let deg = net.weighted_degrees();
    let power = lazy_walk_power(net, t, exec);
    let scale: Vec<f64> = deg.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let x = DMatrix::from_fn(n, n, |i, c| power[i * n + c] * scale[c]);
    let gram = &x * x.transpose();
    let mut values = vec![0.0; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let d2 = gram[(a, a)] + gram[(b, b)] - 2.0 * gram[(a, b)];
            let d = d2.max(0.0).sqrt();
            values[a * n + b] = d;
            values[b * n + a] = d;
        }
    }
    Ok(DissimilarityMatrix {
        n,
        values,
        kind: Some(DistanceKind::Diffusion),
        diffusion_t: Some(t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEQ: Execution = Execution::Sequential;

    fn path3() -> TransitionNetwork {
        TransitionNetwork::from_edges(3, &[(0, 1, 1), (1, 2, 1)]).unwrap()
    }

    fn parallel_routes() -> TransitionNetwork {
        // a=0, b=1, c=2: direct a-b weight 1, detour a-c-b weights 10, 10
        TransitionNetwork::from_edges(3, &[(0, 1, 1), (0, 2, 10), (2, 1, 10)]).unwrap()
    }

    #[test]
    fn hop_distances() {
        let cycle = TransitionNetwork::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
            .unwrap();
        let d = unweighted_shortest_path(&cycle, SEQ);
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.get(1, 3), 2.0);
        assert_eq!(unweighted_shortest_path(&path3(), SEQ).get(0, 2), 2.0);
    }

    #[test]
    fn reciprocal_cost_prefers_heavy_detour() {
        let net = parallel_routes();
        let paths = reciprocal_optimal_paths(&net, SEQ);
        assert_eq!(paths.path(0, 1), vec![0, 2, 1]);
        assert!((paths.cost(0, 1) - 0.2).abs() < 1e-12);
        assert_eq!(weighted_shortest_path(&net, SEQ).get(0, 1), 20.0);
        assert_eq!(shortest_weighted_path(&net, SEQ).get(0, 1), 2.0);
    }

    #[test]
    fn single_edge() {
        let net = TransitionNetwork::from_edges(2, &[(0, 1, 5)]).unwrap();
        assert_eq!(reciprocal_optimal_paths(&net, SEQ).path(1, 0), vec![0, 1]);
        assert_eq!(weighted_shortest_path(&net, SEQ).get(0, 1), 5.0);
        assert_eq!(shortest_weighted_path(&net, SEQ).get(0, 1), 1.0);
        assert_eq!(transition_matrix(&net), vec![0.0, 1.0, 1.0, 0.0]);
        let d = diffusion_distance(&net, 3, SEQ).unwrap();
        assert!(d.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn ties_pick_lexicographic_path() {
        // two equal-cost two-hop routes 0-1-3 and 0-2-3
        let net = TransitionNetwork::from_edges(4, &[(0, 2, 1), (2, 3, 1), (0, 1, 1), (1, 3, 1)])
            .unwrap();
        assert_eq!(
            reciprocal_optimal_paths(&net, SEQ).path(3, 0),
            vec![0, 1, 3]
        );
    }

    #[test]
    fn equal_cost_prefers_fewer_hops() {
        // 0-1 direct with w=1 costs 1; 0-2-3-1 with w=3 costs 1 too
        let net = TransitionNetwork::from_edges(4, &[(0, 1, 1), (0, 2, 3), (2, 3, 3), (3, 1, 3)])
            .unwrap();
        let paths = reciprocal_optimal_paths(&net, SEQ);
        assert_eq!(paths.path(0, 1), vec![0, 1]);
        assert_eq!(weighted_shortest_path(&net, SEQ).get(0, 1), 1.0);
    }

    #[test]
    fn transition_rows() {
        let star = TransitionNetwork::from_edges(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]).unwrap();
        let p = transition_matrix(&star);
        for j in 1..4 {
            assert!((p[j] - 1.0 / 3.0).abs() < 1e-15);
        }
        let tri = TransitionNetwork::from_edges(3, &[(0, 1, 1), (0, 2, 3)]).unwrap();
        let p = transition_matrix(&tri);
        assert_eq!((p[1], p[2]), (0.25, 0.75));
    }

    #[test]
    fn diffusion_on_path_matches_hand_arithmetic() {
        // P~ rows: [1/2, 1/2, 0], [1/4, 1/2, 1/4], [0, 1/2, 1/2]; degrees 1, 2, 1.
        // d(0,2)^2 = (1/2)^2 / 1 + 0 + (1/2)^2 / 1 = 1/2
        // d(0,1)^2 = (1/4)^2 + 0 + (1/4)^2 = 1/8
        let d = diffusion_distance(&path3(), 1, SEQ).unwrap();
        assert!((d.get(0, 2) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((d.get(0, 1) - 0.125f64.sqrt()).abs() < 1e-12);
        assert!((d.get(0, 1) - d.get(1, 2)).abs() < 1e-12);
        assert_eq!(d.get(1, 1), 0.0);
        assert_eq!(d.diffusion_t(), Some(1));
        assert!(diffusion_distance(&path3(), 0, SEQ).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![1.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
    }

    #[test]
    fn default_t() {
        assert_eq!(default_diffusion_t(1), 1);
        assert_eq!(default_diffusion_t(8), 4);
        assert_eq!(default_diffusion_t(9), 5);
    }
}
