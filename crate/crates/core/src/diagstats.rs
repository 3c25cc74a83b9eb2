//! Diagram statistics: lifetimes, normalized persistent entropy and the
//! bottleneck distance.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphdist::DissimilarityMatrix;
use crate::par::{self, Execution};

pub fn lifetimes(d: &[(f64, f64)]) -> Vec<f64> {
    d.iter().map(|&(b, death)| death - b).collect()
}

/// Largest lifetime; 0 for an empty diagram.
pub fn max_lifetime(d: &[(f64, f64)]) -> f64 {
    lifetimes(d).into_iter().fold(0.0, f64::max)
}

pub fn total_persistence(d: &[(f64, f64)]) -> f64 {
    lifetimes(d).iter().sum()
}

/// Denominator of the normalized entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyNormalization {
    /// `log2` of the total persistence.
    #[default]
    TotalPersistence,
    /// `log2` of the number of pairs.
    PairCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entropy {
    pub value: f64,
    /// Set when the diagram had no pairs and `value` was defined as 0.
    pub empty_diagram: bool,
}

/// Shannon entropy of the lifetime distribution divided by
/// `log2(total persistence)`.
///
/// An empty diagram gives 0 with a logged warning. A total persistence of
/// exactly 1 leaves the quotient undefined and is an error.
pub fn persistent_entropy(d: &[(f64, f64)]) -> Result<f64> {
    Ok(persistent_entropy_with(d, EntropyNormalization::TotalPersistence)?.value)
}

pub fn persistent_entropy_with(d: &[(f64, f64)], norm: EntropyNormalization) -> Result<Entropy> {
    if d.is_empty() {
        log::warn!("persistent entropy of an empty diagram defined as 0");
        return Ok(Entropy {
            value: 0.0,
            empty_diagram: true,
        });
    }
    let total = total_persistence(d);
    let h: f64 = lifetimes(d)
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| {
            let p = l / total;
            -p * p.log2()
        })
        .sum();
    let denom = match norm {
        EntropyNormalization::TotalPersistence => total.log2(),
        EntropyNormalization::PairCount => (d.len() as f64).log2(),
    };
    if denom == 0.0 {
        return match norm {
            EntropyNormalization::TotalPersistence => Err(Error::EntropyUndefined),
            // a single pair carries no uncertainty
            EntropyNormalization::PairCount => Ok(Entropy {
                value: 0.0,
                empty_diagram: false,
            }),
        };
    }
    Ok(Entropy {
        // + 0.0 turns -0.0 from a single-pair diagram into 0.0
        value: h / denom + 0.0,
        empty_diagram: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramSummary {
    pub max_lifetime: f64,
    pub entropy: f64,
    pub pair_count: usize,
    pub total_persistence: f64,
    pub empty_diagram: bool,
}

pub fn summarize(d: &[(f64, f64)]) -> Result<DiagramSummary> {
    let e = persistent_entropy_with(d, EntropyNormalization::TotalPersistence)?;
    Ok(DiagramSummary {
        max_lifetime: max_lifetime(d),
        entropy: e.value,
        pair_count: d.len(),
        total_persistence: total_persistence(d),
        empty_diagram: e.empty_diagram,
    })
}

fn sup_norm(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn half_life(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Bipartite graph between `D ∪ diag(F)` and `F ∪ diag(D)`.
///
/// Left vertex `i < p` is `D[i]`, left `p + j` is the diagonal copy of
/// `F[j]`; right vertex `j < q` is `F[j]`, right `q + i` the diagonal copy
/// of `D[i]`.
struct MatchingProblem<'a> {
    d: &'a [(f64, f64)],
    f: &'a [(f64, f64)],
}

impl MatchingProblem<'_> {
    fn adjacency(&self, eps: f64) -> Vec<Vec<usize>> {
        let (p, q) = (self.d.len(), self.f.len());
        let mut adj = vec![Vec::new(); p + q];
        for (i, &a) in self.d.iter().enumerate() {
            for (j, &b) in self.f.iter().enumerate() {
                if sup_norm(a, b) <= eps {
                    adj[i].push(j);
                }
            }
            if half_life(a) <= eps {
                adj[i].push(q + i);
            }
        }
        for (j, &b) in self.f.iter().enumerate() {
            if half_life(b) <= eps {
                adj[p + j].push(j);
            }
            adj[p + j].extend((0..p).map(|i| q + i));
        }
        adj
    }

    fn feasible(&self, eps: f64) -> bool {
        let n = self.d.len() + self.f.len();
        hopcroft_karp(&self.adjacency(eps), n) == n
    }
}

/// Size of a maximum matching; `adj[l]` lists right vertices `< right_count`.
fn hopcroft_karp(adj: &[Vec<usize>], right_count: usize) -> usize {
    const NIL: usize = usize::MAX;
    let left_count = adj.len();
    let mut match_l = vec![NIL; left_count];
    let mut match_r = vec![NIL; right_count];
    let mut dist = vec![0usize; left_count];
    let mut matched = 0;

    loop {
        // layer the free left vertices
        let mut queue = VecDeque::new();
        for l in 0..left_count {
            if match_l[l] == NIL {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let m = match_r[r];
                if m == NIL {
                    found = true;
                } else if dist[m] == usize::MAX {
                    dist[m] = dist[l] + 1;
                    queue.push_back(m);
                }
            }
        }
        if !found {
            return matched;
        }

        let mut next_edge = vec![0usize; left_count];
        for l in 0..left_count {
            if match_l[l] == NIL
                && augment(
                    l,
                    adj,
                    &mut match_l,
                    &mut match_r,
                    &mut dist,
                    &mut next_edge,
                )
            {
                matched += 1;
            }
        }
    }
}

fn augment(
    start: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
    next_edge: &mut [usize],
) -> bool {
    const NIL: usize = usize::MAX;
    // iterative DFS along the BFS layers
    let mut stack = vec![start];
    while let Some(&l) = stack.last() {
        if next_edge[l] == adj[l].len() {
            dist[l] = usize::MAX;
            stack.pop();
            continue;
        }
        let r = adj[l][next_edge[l]];
        let m = match_r[r];
        if m == NIL {
            // flip the alternating path recorded on the stack
            let mut r = r;
            while let Some(l) = stack.pop() {
                let prev = match_l[l];
                match_l[l] = r;
                match_r[r] = l;
                r = prev;
            }
            return true;
        }
        if dist[m] == dist[l] + 1 {
            stack.push(m);
        } else {
            next_edge[l] += 1;
        }
    }
    false
}

/// Bottleneck distance between two finite diagrams under the sup norm, with
/// unmatched points sent to the diagonal at cost `(death - birth) / 2`.
pub fn bottleneck(d: &[(f64, f64)], f: &[(f64, f64)]) -> f64 {
    if d.is_empty() && f.is_empty() {
        return 0.0;
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(d.len() * f.len() + d.len() + f.len() + 1);
    candidates.push(0.0);
    for &a in d {
        candidates.extend(f.iter().map(|&b| sup_norm(a, b)));
    }
    candidates.extend(d.iter().chain(f).map(|&a| half_life(a)));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let problem = MatchingProblem { d, f };
    // matching everything to the diagonal is always feasible
    let upper = d.iter().chain(f).map(|&a| half_life(a)).fold(0.0, f64::max);
    let mut hi = candidates.partition_point(|&c| c < upper);
    let mut lo = 0;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if problem.feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Pairwise bottleneck distances; entries are computed over the upper
/// triangle and mirrored.
pub fn bottleneck_matrix(diagrams: &[Vec<(f64, f64)>], exec: Execution) -> DissimilarityMatrix {
    let n = diagrams.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let dists = par::map_slice(exec, &pairs, |&(i, j)| {
        bottleneck(&diagrams[i], &diagrams[j])
    });
    let mut values = vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(&dists) {
        values[i * n + j] = v;
        values[j * n + i] = v;
    }
    DissimilarityMatrix::new(n, values).expect("bottleneck matrix is a valid dissimilarity")
}
