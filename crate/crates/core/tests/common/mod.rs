#![allow(dead_code)]

pub mod oracle;

use cgnet::graphdist::DissimilarityMatrix;

/// Euclidean distance matrix of planar points.
pub fn euclidean(points: &[(f64, f64)]) -> DissimilarityMatrix {
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                .collect()
        })
        .collect();
    DissimilarityMatrix::from_rows(&rows).unwrap()
}

/// Sorts pairs and rounds to `digits` decimals for comparison.
pub fn canonical(pairs: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = pairs.to_vec();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    out
}

pub fn same_pairs(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> bool {
    let (a, b) = (canonical(a), canonical(b));
    a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(p, q)| (p.0 - q.0).abs() <= tol && (p.1 - q.1).abs() <= tol)
}
