//! Rips persistence in dimensions 0 and 1 over a dissimilarity matrix.
//!
//! Dimension 0 is a union-find sweep over the sorted edges. Dimension 1 is
//! computed as persistent cohomology: edge coboundaries are reduced in
//! reverse filtration order, with clearing of the edges already paired in
//! dimension 0 and a shortcut for columns whose first cofacet is still
//! unclaimed. Triangles are generated on demand from the matrix.
//!
//! Simplices with equal filtration value are ordered vertices, edges,
//! triangles, then lexicographically by sorted vertex tuple.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphdist::{DissimilarityMatrix, DistanceKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiltrationEdge {
    pub u: u32,
    pub v: u32,
    pub value: f64,
}

/// Edges of the Rips filtration in ascending (value, u, v) order; triangles
/// are implied by the clique rule and enumerated lazily.
#[derive(Debug, Clone)]
pub struct Filtration<'a> {
    matrix: &'a DissimilarityMatrix,
    edges: Vec<FiltrationEdge>,
    threshold: f64,
}

impl<'a> Filtration<'a> {
    pub fn vertex_count(&self) -> usize {
        self.matrix.size()
    }

    pub fn edges(&self) -> &[FiltrationEdge] {
        &self.edges
    }

    /// Largest filtration value included; `f64::INFINITY` when unbounded.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Entry value of triangle `{a, b, c}`: its longest edge.
    pub fn triangle_value(&self, a: usize, b: usize, c: usize) -> f64 {
        let m = self.matrix;
        m.get(a, b).max(m.get(a, c)).max(m.get(b, c))
    }
}

/// Full Rips filtration: every unordered pair is an edge.
pub fn build_filtration(d: &DissimilarityMatrix) -> Filtration<'_> {
    build_filtration_with_threshold(d, f64::INFINITY)
}

/// Rips filtration truncated at `threshold` (edges and triangles with a
/// larger value are left out).
pub fn build_filtration_with_threshold(d: &DissimilarityMatrix, threshold: f64) -> Filtration<'_> {
    let n = d.size();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let value = d.get(u, v);
            if value <= threshold {
                edges.push(FiltrationEdge {
                    u: u as u32,
                    v: v as u32,
                    value,
                });
            }
        }
    }
    edges.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.u.cmp(&b.u))
            .then(a.v.cmp(&b.v))
    });
    Filtration {
        matrix: d,
        edges,
        threshold,
    }
}

/// Smallest `r` at which some vertex is within `r` of every other vertex.
/// Past it the Rips complex is a cone, so every finite class has died.
pub fn enclosing_radius(d: &DissimilarityMatrix) -> f64 {
    (0..d.size())
        .map(|i| d.row(i).iter().copied().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// The bundled four-node toy example: a loop with one short side whose
/// diagonals close it late.
#[derive(Debug, Clone, Deserialize)]
pub struct ToyExample {
    #[serde(rename = "_provenance")]
    pub provenance: String,
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub expected: ToyExpectation,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ToyExpectation {
    pub dim0_deaths: Vec<f64>,
    pub dim1: Vec<(f64, f64)>,
}

impl ToyExample {
    pub fn dissimilarity(&self) -> Result<DissimilarityMatrix> {
        DissimilarityMatrix::from_rows(&self.matrix)
    }
}

pub fn toy_example() -> ToyExample {
    serde_json::from_str(include_str!("../fixtures/toy_rips.json")).expect("bundled fixture parses")
}

/// Persistence pairs in dimensions 0 and 1, infinite classes excluded.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub dim0: Vec<(f64, f64)>,
    pub dim1: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub distance: Option<DistanceKind>,
    pub diffusion_t: Option<usize>,
    pub vertex_count: usize,
}

impl PersistenceDiagram {
    pub fn dimension(&self, dim: usize) -> &[(f64, f64)] {
        match dim {
            0 => &self.dim0,
            1 => &self.dim1,
            _ => &[],
        }
    }

    /// `{"dim0": [[b, d], ...], "dim1": [...], "provenance": {...}}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("diagram serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(value.clone())?)
    }

    /// Multiplies every birth and death by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let scale = |pts: &[(f64, f64)]| pts.iter().map(|&(b, d)| (b * alpha, d * alpha)).collect();
        PersistenceDiagram {
            dim0: scale(&self.dim0),
            dim1: scale(&self.dim1),
            provenance: self.provenance.clone(),
        }
    }
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    /// Merges the classes of `a` and `b`; false if already joined.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (hi, lo) = if self.rank[ra as usize] >= self.rank[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lo as usize] = hi;
        if self.rank[hi as usize] == self.rank[lo as usize] {
            self.rank[hi as usize] += 1;
        }
        true
    }
}

/// Dimension-0 pairs plus, per edge, whether it merged two components.
fn dim0_sweep(f: &Filtration) -> (Vec<(f64, f64)>, Vec<bool>) {
    let mut uf = UnionFind::new(f.vertex_count());
    let mut pairs = Vec::new();
    let mut merges = vec![false; f.edges.len()];
    for (i, e) in f.edges.iter().enumerate() {
        if uf.union(e.u, e.v) {
            pairs.push((0.0, e.value));
            merges[i] = true;
        }
    }
    (pairs, merges)
}

/// Finite dimension-0 pairs `(0, death)`, one per merge.
pub fn persistence_dim0(f: &Filtration) -> Vec<(f64, f64)> {
    dim0_sweep(f).0
}

const ABSENT: u32 = u32::MAX;

/// The truncated complex with filtration values replaced by their rank among
/// the distinct edge values. Each vertex keeps its neighbours sorted by
/// (rank, index) so that coboundaries can be walked in filtration order.
struct RankedComplex {
    n: usize,
    values: Vec<f64>,
    rank: Vec<u32>,
    neighbors: Vec<Vec<(u32, u32)>>,
}

impl RankedComplex {
    fn new(f: &Filtration) -> Self {
        let n = f.vertex_count();
        let mut values: Vec<f64> = Vec::new();
        let mut rank = vec![ABSENT; n * n];
        for e in &f.edges {
            if values.last() != Some(&e.value) {
                values.push(e.value);
            }
            let r = (values.len() - 1) as u32;
            let (u, v) = (e.u as usize, e.v as usize);
            rank[u * n + v] = r;
            rank[v * n + u] = r;
        }
        let neighbors = (0..n)
            .map(|u| {
                let mut row: Vec<(u32, u32)> = (0..n)
                    .filter(|&w| rank[u * n + w] != ABSENT)
                    .map(|w| (rank[u * n + w], w as u32))
                    .collect();
                row.sort_unstable();
                row
            })
            .collect();
        RankedComplex {
            n,
            values,
            rank,
            neighbors,
        }
    }

    fn rank(&self, a: u32, b: u32) -> u32 {
        self.rank[a as usize * self.n + b as usize]
    }

    fn value_of(&self, key: u128) -> f64 {
        self.values[(key >> 96) as usize]
    }

    /// Smallest cofacet of edge `{u, v}`. Cofacets of one edge with the same
    /// value are ordered by the third vertex, so the first vertex whose
    /// triangle adds no longer edge wins outright.
    fn first_cofacet(&self, u: u32, v: u32) -> Option<u128> {
        let r = self.rank(u, v);
        let (ru, rv) = (
            &self.rank[u as usize * self.n..][..self.n],
            &self.rank[v as usize * self.n..][..self.n],
        );
        for w in 0..self.n {
            if w as u32 != u && w as u32 != v && ru[w] <= r && rv[w] <= r {
                return Some(triangle_key(r, u, v, w as u32));
            }
        }
        Coboundary::new(self, u, v).next()
    }
}

/// Orders triangles by (value rank, sorted vertices).
fn triangle_key(r: u32, a: u32, b: u32, c: u32) -> u128 {
    let mut v = [a, b, c];
    v.sort_unstable();
    (r as u128) << 96 | (v[0] as u128) << 64 | (v[1] as u128) << 32 | v[2] as u128
}

/// Cofacets of one edge in ascending order, produced lazily by merging the
/// neighbour lists of its endpoints.
struct Coboundary<'c> {
    c: &'c RankedComplex,
    u: u32,
    v: u32,
    r: u32,
    // third vertices of the cofacets whose value is the edge's own
    chunk: Vec<u32>,
    next_chunk: usize,
    pu: usize,
    pv: usize,
}

impl<'c> Coboundary<'c> {
    fn new(c: &'c RankedComplex, u: u32, v: u32) -> Self {
        let r = c.rank(u, v);
        let lu = &c.neighbors[u as usize];
        let lv = &c.neighbors[v as usize];
        let pu = lu.partition_point(|&(rw, _)| rw <= r);
        let pv = lv.partition_point(|&(rw, _)| rw <= r);
        let mut chunk: Vec<u32> = lu[..pu]
            .iter()
            .map(|&(_, w)| w)
            .filter(|&w| w != v && c.rank(v, w) <= r)
            .collect();
        chunk.sort_unstable();
        Coboundary {
            c,
            u,
            v,
            r,
            chunk,
            next_chunk: 0,
            pu,
            pv,
        }
    }
}

impl Iterator for Coboundary<'_> {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        if let Some(&w) = self.chunk.get(self.next_chunk) {
            self.next_chunk += 1;
            return Some(triangle_key(self.r, self.u, self.v, w));
        }
        let lu = &self.c.neighbors[self.u as usize];
        let lv = &self.c.neighbors[self.v as usize];
        loop {
            let from_u = match (lu.get(self.pu), lv.get(self.pv)) {
                (None, None) => return None,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(a), Some(b)) => a <= b,
            };
            // a triangle enters with its second endpoint edge; on a tie the
            // entry from u's list is the one emitted
            if from_u {
                let (r, w) = lu[self.pu];
                self.pu += 1;
                if w != self.v && self.c.rank(self.v, w) <= r {
                    return Some(triangle_key(r, self.u, self.v, w));
                }
            } else {
                let (r, w) = lv[self.pv];
                self.pv += 1;
                if w != self.u && self.c.rank(self.u, w) < r {
                    return Some(triangle_key(r, self.u, self.v, w));
                }
            }
        }
    }
}

/// Marks a heap entry that is not backed by a coboundary stream.
const DETACHED: usize = usize::MAX;

/// Working coboundary of one column: a heap over the merged streams of its
/// edges, with Z/2 cancellation of equal heads.
struct WorkingColumn<'c> {
    heap: BinaryHeap<Reverse<(u128, usize)>>,
    streams: Vec<Coboundary<'c>>,
}

impl<'c> WorkingColumn<'c> {
    fn new() -> Self {
        WorkingColumn {
            heap: BinaryHeap::new(),
            streams: Vec::new(),
        }
    }

    fn add(&mut self, c: &'c RankedComplex, e: &FiltrationEdge) {
        let mut s = Coboundary::new(c, e.u, e.v);
        if let Some(head) = s.next() {
            self.heap.push(Reverse((head, self.streams.len())));
        }
        self.streams.push(s);
    }

    fn advance(&mut self, i: usize) {
        if i == DETACHED {
            return;
        }
        if let Some(head) = self.streams[i].next() {
            self.heap.push(Reverse((head, i)));
        }
    }

    /// Smallest surviving cofacet. It stays in the column as a detached
    /// entry until an added column cancels it.
    fn pivot(&mut self) -> Option<u128> {
        loop {
            let Reverse((key, i)) = self.heap.pop()?;
            self.advance(i);
            let mut count = 1;
            while let Some(&Reverse((next, j))) = self.heap.peek() {
                if next != key {
                    break;
                }
                self.heap.pop();
                self.advance(j);
                count += 1;
            }
            if count % 2 == 1 {
                self.heap.push(Reverse((key, DETACHED)));
                return Some(key);
            }
        }
    }
}

fn dim1_from_sweep(f: &Filtration, merges: &[bool]) -> Vec<(f64, f64)> {
    let c = RankedComplex::new(f);
    let mut pivot_owner: HashMap<u128, usize> = HashMap::new();
    // columns that needed reduction; every other column is its own edge
    let mut reduction: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut pairs = Vec::new();

    for (idx, edge) in f.edges.iter().enumerate().rev() {
        if merges[idx] {
            continue;
        }
        let Some(first) = c.first_cofacet(edge.u, edge.v) else {
            continue;
        };
        if let std::collections::hash_map::Entry::Vacant(slot) = pivot_owner.entry(first) {
            slot.insert(idx);
            let death = c.value_of(first);
            if death > edge.value {
                pairs.push((edge.value, death));
            }
            continue;
        }

        let mut working = WorkingColumn::new();
        working.add(&c, edge);
        let mut column = vec![idx];
        while let Some(pivot) = working.pivot() {
            match pivot_owner.get(&pivot) {
                Some(&owner) => {
                    let single = [owner];
                    let owner_col = reduction.get(&owner).map_or(&single[..], |v| &v[..]);
                    for &other in owner_col {
                        working.add(&c, &f.edges[other]);
                    }
                    column = symmetric_difference(&column, owner_col);
                }
                None => {
                    pivot_owner.insert(pivot, idx);
                    reduction.insert(idx, column);
                    let death = c.value_of(pivot);
                    if death > edge.value {
                        pairs.push((edge.value, death));
                    }
                    break;
                }
            }
        }
    }
    pairs
}

/// Symmetric difference of two ascending index lists.
fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Finite dimension-1 pairs with positive persistence.
pub fn persistence_dim1(f: &Filtration) -> Vec<(f64, f64)> {
    let (_, merges) = dim0_sweep(f);
    let mut pairs = dim1_from_sweep(f, &merges);
    sort_pairs(&mut pairs);
    pairs
}

fn sort_pairs(pairs: &mut [(f64, f64)]) {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
}

/// Both diagrams of the Rips filtration of `d`.
///
/// The filtration is truncated at the enclosing radius, which leaves every
/// finite pair unchanged.
pub fn compute_diagrams(d: &DissimilarityMatrix) -> Result<PersistenceDiagram> {
    validate(d)?;
    let f = build_filtration_with_threshold(d, enclosing_radius(d));
    let (mut dim0, merges) = dim0_sweep(&f);
    let mut dim1 = dim1_from_sweep(&f, &merges);
    sort_pairs(&mut dim0);
    sort_pairs(&mut dim1);
    Ok(PersistenceDiagram {
        dim0,
        dim1,
        provenance: Some(Provenance {
            distance: d.kind(),
            diffusion_t: d.diffusion_t(),
            vertex_count: d.size(),
        }),
    })
}

fn validate(d: &DissimilarityMatrix) -> Result<()> {
    let n = d.size();
    for i in 0..n {
        for j in 0..i {
            let v = d.get(i, j);
            if !(v >= 0.0) || v != d.get(j, i) {
                return Err(Error::InvalidInput(format!(
                    "matrix entry ({i}, {j}) is negative or asymmetric"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> DissimilarityMatrix {
        DissimilarityMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn equilateral_triangle_fills_immediately() {
        let d = matrix(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
        let f = build_filtration(&d);
        assert_eq!(f.edges().len(), 3);
        assert!(f.edges().iter().all(|e| e.value == 1.0));
        assert_eq!(f.triangle_value(0, 1, 2), 1.0);
        let dgm = compute_diagrams(&d).unwrap();
        assert_eq!(dgm.dim0, vec![(0.0, 1.0), (0.0, 1.0)]);
        assert!(dgm.dim1.is_empty());
    }

    #[test]
    fn duplicate_points_keep_zero_death() {
        let d = matrix(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let f = build_filtration(&d);
        assert_eq!(f.edges()[0].value, 0.0);
        assert_eq!(persistence_dim0(&f), vec![(0.0, 0.0)]);
    }

    #[test]
    fn single_vertex_is_empty() {
        let d = matrix(&[&[0.0]]);
        let dgm = compute_diagrams(&d).unwrap();
        assert!(dgm.dim0.is_empty() && dgm.dim1.is_empty());
    }

    #[test]
    fn chained_points_die_in_order() {
        // points on a line at gaps 1, 2, 3, 4
        let xs = [0.0, 1.0, 3.0, 6.0, 10.0];
        let rows: Vec<Vec<f64>> = xs
            .iter()
            .map(|a| xs.iter().map(|b: &f64| (a - b).abs()).collect())
            .collect();
        let d = DissimilarityMatrix::from_rows(&rows).unwrap();
        let deaths: Vec<f64> = persistence_dim0(&build_filtration(&d))
            .iter()
            .map(|p| p.1)
            .collect();
        assert_eq!(deaths, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn square_with_long_diagonals() {
        let d = matrix(&[
            &[0.0, 1.0, 2.0, 1.0],
            &[1.0, 0.0, 1.0, 2.0],
            &[2.0, 1.0, 0.0, 1.0],
            &[1.0, 2.0, 1.0, 0.0],
        ]);
        let f = build_filtration(&d);
        assert_eq!(persistence_dim1(&f), vec![(1.0, 2.0)]);
        assert_eq!(compute_diagrams(&d).unwrap().dim1, vec![(1.0, 2.0)]);
    }

    #[test]
    fn enclosing_radius_of_path() {
        let d = matrix(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]]);
        assert_eq!(enclosing_radius(&d), 1.0);
    }

    #[test]
    fn toy_example_diagrams() {
        let toy = toy_example();
        let dgm = compute_diagrams(&toy.dissimilarity().unwrap()).unwrap();
        let deaths: Vec<f64> = dgm.dim0.iter().map(|p| p.1).collect();
        assert_eq!(deaths, toy.expected.dim0_deaths);
        assert_eq!(dgm.dim1, toy.expected.dim1);
    }

    #[test]
    fn symmetric_difference_cancels() {
        assert_eq!(symmetric_difference(&[1, 3, 5], &[3, 4]), vec![1, 4, 5]);
    }

    #[test]
    fn diagram_json_shape() {
        let dgm = PersistenceDiagram {
            dim0: vec![(0.0, 1.0)],
            dim1: vec![(1.0, 2.0)],
            provenance: None,
        };
        let json = dgm.to_json();
        assert_eq!(json["dim1"][0][1], 2.0);
        assert_eq!(PersistenceDiagram::from_json(&json).unwrap(), dgm);
    }
}
