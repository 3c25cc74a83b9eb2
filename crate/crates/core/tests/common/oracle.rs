//! Brute-force persistence: standard column reduction of the full boundary
//! matrix over Z/2 with every vertex, edge and triangle listed explicitly.

use cgnet::graphdist::DissimilarityMatrix;

struct Simplex {
    value: f64,
    verts: Vec<usize>,
}

/// Finite pairs in dimensions 0 and 1, zero-length dimension-1 pairs dropped.
pub fn reference_diagrams(d: &DissimilarityMatrix) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let n = d.size();
    let mut simplices = Vec::new();
    for i in 0..n {
        simplices.push(Simplex {
            value: 0.0,
            verts: vec![i],
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            simplices.push(Simplex {
                value: d.get(i, j),
                verts: vec![i, j],
            });
            for k in (j + 1)..n {
                let v = d.get(i, j).max(d.get(i, k)).max(d.get(j, k));
                simplices.push(Simplex {
                    value: v,
                    verts: vec![i, j, k],
                });
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.verts.len().cmp(&b.verts.len()))
            .then(a.verts.cmp(&b.verts))
    });
    let index: std::collections::HashMap<Vec<usize>, usize> = simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s.verts.clone(), i))
        .collect();

    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| {
            if s.verts.len() == 1 {
                return Vec::new();
            }
            let mut col: Vec<usize> = (0..s.verts.len())
                .map(|skip| {
                    let face: Vec<usize> = s
                        .verts
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    index[&face]
                })
                .collect();
            col.sort_unstable();
            col
        })
        .collect();

    let mut low_owner: std::collections::HashMap<usize, usize> = Default::default();
    let mut dim0 = Vec::new();
    let mut dim1 = Vec::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match low_owner.get(&low) {
                Some(&k) => {
                    let other = columns[k].clone();
                    columns[j] = xor(&columns[j], &other);
                }
                None => break,
            }
        }
        if let Some(&low) = columns[j].last() {
            low_owner.insert(low, j);
            let birth = simplices[low].value;
            let death = simplices[j].value;
            match simplices[j].verts.len() {
                2 => dim0.push((birth, death)),
                3 if death > birth => dim1.push((birth, death)),
                _ => {}
            }
        }
    }
    (dim0, dim1)
}

fn xor(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

/// Bottleneck distance by trying every bijection between the two diagrams
/// augmented with diagonal slots. Exponential; keep diagrams tiny.
pub fn brute_bottleneck(x: &[(f64, f64)], y: &[(f64, f64)]) -> f64 {
    let (p, q) = (x.len(), y.len());
    let size = p + q;
    let half = |a: (f64, f64)| (a.1 - a.0) / 2.0;
    // left slots: x then q diagonal slots; right slots: y then p diagonal slots
    let cost = |i: usize, j: usize| -> f64 {
        match (i < p, j < q) {
            (true, true) => (x[i].0 - y[j].0).abs().max((x[i].1 - y[j].1).abs()),
            (true, false) => half(x[i]),
            (false, true) => half(y[j]),
            (false, false) => 0.0,
        }
    };
    let mut perm: Vec<usize> = (0..size).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |pm| {
        let worst = pm
            .iter()
            .enumerate()
            .map(|(i, &j)| cost(i, j))
            .fold(0.0, f64::max);
        best = best.min(worst);
    });
    if size == 0 {
        0.0
    } else {
        best
    }
}

fn permute(v: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// All-pairs minimum of the summed edge costs, Floyd-Warshall.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, c) in edges {
        d[u][v] = d[u][v].min(c);
        d[v][u] = d[v][u].min(c);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}
