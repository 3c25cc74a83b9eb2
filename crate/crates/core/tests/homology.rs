mod common;

use cgnet::graphdist::DissimilarityMatrix;
use cgnet::homology::{build_filtration, compute_diagrams, persistence_dim1};
use common::oracle::reference_diagrams;
use common::{euclidean, same_pairs};
use proptest::prelude::*;

fn integer_matrix(n: usize, entries: &[u8]) -> DissimilarityMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    let mut it = entries.iter();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = f64::from(*it.next().unwrap() % 5 + 1);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    DissimilarityMatrix::from_rows(&rows).unwrap()
}

#[test]
fn cycle_graph_hop_metric() {
    let n = 9;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i: usize| {
            (0..n)
                .map(|j: usize| i.abs_diff(j).min(n - i.abs_diff(j)) as f64)
                .collect()
        })
        .collect();
    let d = DissimilarityMatrix::from_rows(&rows).unwrap();
    let dgm = compute_diagrams(&d).unwrap();
    assert_eq!(dgm.dim1, vec![(1.0, 3.0)]);
    assert_eq!(dgm.dim0.len(), n - 1);
}

#[test]
fn complete_graph_has_no_loops() {
    let n = 7;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect();
    let d = DissimilarityMatrix::from_rows(&rows).unwrap();
    assert!(compute_diagrams(&d).unwrap().dim1.is_empty());
}

#[test]
fn circle_points_give_one_loop() {
    let pts: Vec<(f64, f64)> = (0..24)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 24.0;
            (a.cos(), a.sin())
        })
        .collect();
    let dgm = compute_diagrams(&euclidean(&pts)).unwrap();
    assert_eq!(dgm.dim1.len(), 1);
    let (b, d) = dgm.dim1[0];
    assert!(d - b > 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_reference_on_random_points(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..11)) {
        let d = euclidean(&pts);
        let (r0, r1) = reference_diagrams(&d);
        let dgm = compute_diagrams(&d).unwrap();
        prop_assert!(same_pairs(&dgm.dim0, &r0, 1e-12));
        prop_assert!(same_pairs(&dgm.dim1, &r1, 1e-12));
        prop_assert!(same_pairs(&persistence_dim1(&build_filtration(&d)), &r1, 1e-12));
    }

    #[test]
    fn matches_reference_with_heavy_ties(n in 2usize..10, entries in prop::collection::vec(any::<u8>(), 45)) {
        let d = integer_matrix(n, &entries);
        let (r0, r1) = reference_diagrams(&d);
        let dgm = compute_diagrams(&d).unwrap();
        prop_assert!(same_pairs(&dgm.dim0, &r0, 0.0));
        prop_assert!(same_pairs(&dgm.dim1, &r1, 0.0));
    }

    #[test]
    fn scaling_scales_diagrams(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..10), alpha in 0.1f64..10.0) {
        let d = euclidean(&pts);
        let a = compute_diagrams(&d).unwrap().scaled(alpha);
        let b = compute_diagrams(&d.scaled(alpha)).unwrap();
        prop_assert!(same_pairs(&a.dim0, &b.dim0, 1e-9));
        prop_assert!(same_pairs(&a.dim1, &b.dim1, 1e-9));
    }
}
