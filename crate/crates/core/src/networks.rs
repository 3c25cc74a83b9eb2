//! Symbolization of embeddings and transitional network construction.
//!
//! Two symbol maps are supported: ordinal partitions (the sorting
//! permutation of each vector, ranked lexicographically among the `n!`
//! permutations) and coarse graining (the index of the equal-width
//! hypercube that contains the vector). Consecutive symbols become
//! weighted, undirected edges; self-transitions are dropped.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Ordinal,
    Coarse,
}

impl NetworkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkKind::Ordinal => "ordinal",
            NetworkKind::Coarse => "coarse",
        }
    }
}

impl std::str::FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordinal" | "opn" => Ok(NetworkKind::Ordinal),
            "coarse" | "cgssn" => Ok(NetworkKind::Coarse),
            other => Err(Error::InvalidInput(format!(
                "unknown network kind `{other}`"
            ))),
        }
    }
}

/// How embedding vectors are mapped to symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Symbolizer {
    Ordinal,
    Coarse { bins: usize },
}

impl Symbolizer {
    pub fn kind(self) -> NetworkKind {
        match self {
            Symbolizer::Ordinal => NetworkKind::Ordinal,
            Symbolizer::Coarse { .. } => NetworkKind::Coarse,
        }
    }
}

/// 1-based rank of the stable ascending argsort of `v` among all
/// permutations of `0..n` in lexicographic order.
///
/// An increasing vector maps to 1 and a strictly decreasing one to `n!`.
pub fn permutation_index(v: &[f64]) -> u64 {
    let order = sorting_permutation(v);
    lehmer_rank(&order) + 1
}

/// Indices of `v` in ascending order of value; ties keep index order.
pub fn sorting_permutation(v: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    order
}

fn lehmer_rank(perm: &[usize]) -> u64 {
    let n = perm.len();
    let mut rank = 0u64;
    let mut used = vec![false; n];
    for (i, &p) in perm.iter().enumerate() {
        let smaller_unused = (0..p).filter(|&q| !used[q]).count() as u64;
        rank += smaller_unused * factorial((n - 1 - i) as u64);
        used[p] = true;
    }
    rank
}

fn factorial(k: u64) -> u64 {
    (1..=k).product()
}

/// Number of ordinal symbols `n!`.
pub fn ordinal_alphabet(n: usize) -> Result<u64> {
    (1..=n as u64)
        .try_fold(1u64, |acc, k| acc.checked_mul(k))
        .ok_or(Error::AlphabetOverflow {
            base: n as u64,
            dim: n,
        })
}

/// Number of coarse-grained symbols `b^n`.
pub fn coarse_alphabet(bins: usize, n: usize) -> Result<u64> {
    (bins as u64)
        .checked_pow(n as u32)
        .ok_or(Error::AlphabetOverflow {
            base: bins as u64,
            dim: n,
        })
}

/// Bin index of `x` among `bins` equal bins over `[lo, hi]`; `hi` lands in
/// the top bin.
pub fn digitize(x: f64, bins: usize, lo: f64, hi: f64) -> Result<usize> {
    let width = hi - lo;
    let tol = 1e-12 * width;
    if x < lo - tol || x > hi + tol || !x.is_finite() {
        return Err(Error::OutOfDomain { value: x, lo, hi });
    }
    let raw = (bins as f64 * (x - lo) / width).floor();
    Ok(raw.clamp(0.0, (bins - 1) as f64) as usize)
}

/// `1 + sum_j rho[j] * b^j` for the digitized vector `rho`.
pub fn cgss_state_from_digits(rho: &[usize], bins: usize) -> u64 {
    let b = bins as u64;
    rho.iter().rev().fold(0u64, |acc, &r| acc * b + r as u64) + 1
}

/// Coarse-grained state of `v` with `b` bins per axis over `[lo, hi]`.
pub fn assign_cgss_state(v: &[f64], bins: usize, lo: f64, hi: f64) -> Result<u64> {
    if bins < 2 {
        return Err(Error::InvalidInput("need at least 2 bins".into()));
    }
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!(
            "empty bin domain [{lo}, {hi}]"
        )));
    }
    coarse_alphabet(bins, v.len())?;
    let rho = v
        .iter()
        .map(|&x| digitize(x, bins, lo, hi))
        .collect::<Result<Vec<_>>>()?;
    Ok(cgss_state_from_digits(&rho, bins))
}

/// Chronological symbol sequence over the alphabet `1..=alphabet_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSequence {
    pub states: Vec<u64>,
    pub alphabet_size: u64,
    pub symbolizer: Symbolizer,
    pub dimension: usize,
}

impl SymbolSequence {
    pub fn from_states(states: Vec<u64>, alphabet_size: u64, symbolizer: Symbolizer) -> Self {
        SymbolSequence {
            states,
            alphabet_size,
            symbolizer,
            dimension: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Maps every embedding vector to its symbol.
///
/// Coarse graining bins over the source signal range. A zero-range signal
/// puts every vector in the first cell.
pub fn symbolize(emb: &Embedding, symbolizer: Symbolizer) -> Result<SymbolSequence> {
    let n = emb.dimension();
    let (states, alphabet_size) = match symbolizer {
        Symbolizer::Ordinal => {
            let size = ordinal_alphabet(n)?;
            (emb.vectors().map(permutation_index).collect(), size)
        }
        Symbolizer::Coarse { bins } => {
            let size = coarse_alphabet(bins, n)?;
            if bins < 2 {
                return Err(Error::InvalidInput("need at least 2 bins".into()));
            }
            let (lo, hi) = (emb.source_min(), emb.source_max());
            if lo == hi {
                (vec![1; emb.len()], size)
            } else {
                let states = emb
                    .vectors()
                    .map(|v| assign_cgss_state(v, bins, lo, hi))
                    .collect::<Result<Vec<_>>>()?;
                (states, size)
            }
        }
    };
    Ok(SymbolSequence {
        states,
        alphabet_size,
        symbolizer,
        dimension: n,
    })
}

/// Weighted, undirected, simple transition graph over the used symbols.
///
/// Nodes are the used symbols in ascending order; `symbols[node]` recovers
/// the original state. Adjacency is stored as sorted neighbour lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionNetwork {
    symbols: Vec<u64>,
    adjacency: Vec<Vec<(usize, u64)>>,
    kind: Option<NetworkKind>,
}

impl TransitionNetwork {
    /// Builds a network from a dense symmetric zero-diagonal weight matrix.
    pub fn from_adjacency(symbols: Vec<u64>, dense: Vec<u64>) -> Result<Self> {
        let n = symbols.len();
        if dense.len() != n * n {
            return Err(Error::InvalidInput("adjacency shape mismatch".into()));
        }
        for i in 0..n {
            if dense[i * n + i] != 0 {
                return Err(Error::InvalidInput("adjacency has self-loops".into()));
            }
            for j in 0..i {
                if dense[i * n + j] != dense[j * n + i] {
                    return Err(Error::InvalidInput("adjacency is not symmetric".into()));
                }
            }
        }
        let adjacency = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| dense[i * n + j] > 0)
                    .map(|j| (j, dense[i * n + j]))
                    .collect()
            })
            .collect();
        Self::from_lists(symbols, adjacency, None)
    }

    /// Builds a network from an undirected weighted edge list over `0..n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u64)]) -> Result<Self> {
        let mut adjacency: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            if u == v || u >= n || v >= n || w == 0 {
                return Err(Error::InvalidInput(format!("bad edge ({u}, {v}, {w})")));
            }
            if adjacency[u].iter().any(|&(x, _)| x == v) {
                return Err(Error::InvalidInput(format!("duplicate edge ({u}, {v})")));
            }
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self::from_lists((1..=n as u64).collect(), adjacency, None)
    }

    fn from_lists(
        symbols: Vec<u64>,
        adjacency: Vec<Vec<(usize, u64)>>,
        kind: Option<NetworkKind>,
    ) -> Result<Self> {
        let net = TransitionNetwork {
            symbols,
            adjacency,
            kind,
        };
        if !net.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(net)
    }

    pub fn node_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edge weight, 0 when absent.
    pub fn weight(&self, i: usize, j: usize) -> u64 {
        let list = &self.adjacency[i];
        list.binary_search_by_key(&j, |&(k, _)| k)
            .map_or(0, |pos| list[pos].1)
    }

    /// Neighbours `(node, weight)` of `i` in ascending node order.
    pub fn neighbors(&self, i: usize) -> &[(usize, u64)] {
        &self.adjacency[i]
    }

    /// Dense row-major copy of the adjacency matrix.
    pub fn dense_adjacency(&self) -> Vec<u64> {
        let n = self.node_count();
        let mut dense = vec![0u64; n * n];
        for (i, list) in self.adjacency.iter().enumerate() {
            for &(j, w) in list {
                dense[i * n + j] = w;
            }
        }
        dense
    }

    /// Original symbol of each node.
    pub fn symbols(&self) -> &[u64] {
        &self.symbols
    }

    pub fn kind(&self) -> Option<NetworkKind> {
        self.kind
    }

    /// Unweighted degree of each node.
    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Weighted degree (row sum of the adjacency matrix).
    pub fn weighted_degrees(&self) -> Vec<u64> {
        self.adjacency
            .iter()
            .map(|list| list.iter().map(|&(_, w)| w).sum())
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }

    /// Writes `u,v,weight` rows (original symbols, `u < v`).
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["u", "v", "weight"]).map_err(csv_err)?;
        for (i, list) in self.adjacency.iter().enumerate() {
            for &(j, w) in list.iter().filter(|&&(j, _)| j > i) {
                wtr.write_record([
                    self.symbols[i].to_string(),
                    self.symbols[j].to_string(),
                    w.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Adjacency as JSON with the dense matrix over used symbols.
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.node_count();
        let dense = self.dense_adjacency();
        let rows: Vec<&[u64]> = dense.chunks(n.max(1)).collect();
        serde_json::json!({
            "kind": self.kind.map(NetworkKind::as_str),
            "node_count": n,
            "edge_count": self.edge_count(),
            "symbols": self.symbols,
            "adjacency": rows,
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Accumulates transition counts, drops self-transitions, symmetrizes as
/// `A + A^T` and compacts to the used symbols.
pub fn build_network(seq: &SymbolSequence) -> Result<TransitionNetwork> {
    if seq.len() < 2 {
        return Err(Error::DegenerateSequence);
    }
    let mut directed: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for pair in seq.states.windows(2) {
        if pair[0] != pair[1] {
            *directed.entry((pair[0], pair[1])).or_default() += 1;
        }
    }
    if directed.is_empty() {
        return Err(Error::DegenerateSequence);
    }
    let mut symbols: Vec<u64> = directed.keys().flat_map(|&(a, b)| [a, b]).collect();
    symbols.sort_unstable();
    symbols.dedup();
    let row_of: BTreeMap<u64, usize> = symbols.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut undirected: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (&(a, b), &count) in &directed {
        let (i, j) = (row_of[&a], row_of[&b]);
        *undirected.entry((i.min(j), i.max(j))).or_default() += count;
    }
    let mut adjacency: Vec<Vec<(usize, u64)>> = vec![Vec::new(); symbols.len()];
    for (&(i, j), &w) in &undirected {
        adjacency[i].push((j, w));
        adjacency[j].push((i, w));
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    TransitionNetwork::from_lists(symbols, adjacency, Some(seq.symbolizer.kind()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(states: &[u64]) -> SymbolSequence {
        SymbolSequence::from_states(states.to_vec(), 8, Symbolizer::Ordinal)
    }

    #[test]
    fn permutation_extremes() {
        assert_eq!(permutation_index(&[0.1, 0.2, 0.3, 0.4]), 1);
        assert_eq!(permutation_index(&[4.0, 3.0, 2.0, 1.0, 0.0]), 120);
        // ties keep index order, so a constant vector is the identity
        assert_eq!(permutation_index(&[1.0, 1.0, 1.0]), 1);
    }

    #[test]
    fn permutation_sorted_order_of_worked_vector() {
        let v = [-0.08, 0.48, -0.34];
        assert_eq!(sorting_permutation(&v), vec![2, 0, 1]);
        assert_eq!(permutation_index(&v), 5);
    }

    #[test]
    fn cgss_worked_example() {
        assert_eq!(cgss_state_from_digits(&[3, 5, 2], 8), 172);
        // bin centres reproduce the same digits
        let v = [3.5 / 8.0, 5.5 / 8.0, 2.5 / 8.0];
        assert_eq!(assign_cgss_state(&v, 8, 0.0, 1.0).unwrap(), 172);
    }

    #[test]
    fn cgss_corners_and_domain() {
        assert_eq!(assign_cgss_state(&[-2.0; 4], 5, -2.0, 3.0).unwrap(), 1);
        assert_eq!(assign_cgss_state(&[3.0; 4], 5, -2.0, 3.0).unwrap(), 625);
        assert!(matches!(
            assign_cgss_state(&[3.1, 0.0], 5, -2.0, 3.0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(assign_cgss_state(&[3.0 + 1e-13, 0.0], 5, -2.0, 3.0).is_ok());
    }

    #[test]
    fn alternating_pair_symmetrizes_to_three() {
        let net = build_network(&seq(&[1, 2, 1, 2])).unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.weight(0, 1), 3);
        assert_eq!(net.weight(1, 0), 3);
    }

    #[test]
    fn four_cycle_has_unit_weights() {
        let net = build_network(&seq(&[1, 2, 3, 4, 1])).unwrap();
        assert_eq!(net.node_count(), 4);
        assert_eq!(net.edge_count(), 4);
        for (i, j) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            assert_eq!(net.weight(i, j), 1);
        }
        assert_eq!(net.weight(0, 2), 0);
    }

    #[test]
    fn self_loops_only_is_degenerate() {
        assert!(matches!(
            build_network(&seq(&[1, 1, 1, 1])),
            Err(Error::DegenerateSequence)
        ));
        assert!(matches!(
            build_network(&seq(&[3])),
            Err(Error::DegenerateSequence)
        ));
    }

    #[test]
    fn compaction_keeps_symbol_map() {
        let net = build_network(&seq(&[40, 7, 7, 12, 40])).unwrap();
        assert_eq!(net.symbols(), &[7, 12, 40]);
        assert_eq!(net.weight(0, 2), 1);
        assert_eq!(net.weight(0, 1), 1);
        assert_eq!(net.weight(1, 2), 1);
    }

    #[test]
    fn edge_list_export() {
        let net = build_network(&seq(&[1, 2, 1, 3])).unwrap();
        let mut buf = Vec::new();
        net.write_edge_list(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "u,v,weight\n1,2,2\n1,3,1\n"
        );
    }

    #[test]
    fn disconnected_adjacency_rejected() {
        let adj = vec![0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0];
        assert!(matches!(
            TransitionNetwork::from_adjacency(vec![1, 2, 3, 4], adj),
            Err(Error::Disconnected)
        ));
    }
}
