//! Delay-coordinate embedding, parameter selection and the hyperdiagonal
//! diagnostic.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::networks::permutation_index;
use crate::par::{self, Execution};
use crate::signals::TimeSeries;

/// Ordered delay vectors `v_i = [x_i, x_{i+tau}, ..., x_{i+(n-1)tau}]`,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    data: Vec<f64>,
    delay: usize,
    dimension: usize,
    source_min: f64,
    source_max: f64,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dimension)
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Minimum of the whole source signal.
    pub fn source_min(&self) -> f64 {
        self.source_min
    }

    /// Maximum of the whole source signal.
    pub fn source_max(&self) -> f64 {
        self.source_max
    }
}

fn embed_slice(xs: &[f64], tau: usize, n: usize) -> Result<Vec<f64>> {
    let span = tau * (n - 1);
    if xs.len() <= span {
        return Err(Error::SignalTooShort {
            len: xs.len(),
            required: span,
        });
    }
    let count = xs.len() - span;
    let mut data = Vec::with_capacity(count * n);
    for i in 0..count {
        data.extend((0..n).map(|j| xs[i + j * tau]));
    }
    Ok(data)
}

pub fn delay_embed(ts: &TimeSeries, tau: usize, n: usize) -> Result<Embedding> {
    if tau < 1 {
        return Err(Error::InvalidInput("delay must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("dimension must be at least 2".into()));
    }
    let data = embed_slice(ts.samples(), tau, n)?;
    Ok(Embedding {
        data,
        delay: tau,
        dimension: n,
        source_min: ts.min(),
        source_max: ts.max(),
    })
}

/// Normalized permutation entropy of order `n` at delay `tau`, in [0, 1].
pub fn permutation_entropy(xs: &[f64], n: usize, tau: usize) -> Result<f64> {
    let data = embed_slice(xs, tau, n)?;
    let mut counts: HashMap<u64, usize> = HashMap::new();
    let total = data.len() / n;
    for v in data.chunks_exact(n) {
        *counts.entry(permutation_index(v)).or_default() += 1;
    }
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum();
    let states: f64 = (1..=n).map(|k| k as f64).product();
    Ok(h / states.log2())
}

/// Outcome of the multi-scale permutation entropy delay search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelaySelection {
    pub tau: usize,
    /// Normalized permutation entropy for `tau = 1 ..= tau_max`.
    pub curve: Vec<f64>,
    /// Set when the curve has no prominent peak; `tau` is then `tau_max / 2`.
    pub no_prominent_peak: bool,
}

/// Permutation order used by automatic delay selection.
pub const DEFAULT_PE_ORDER: usize = 3;
/// Largest delay scanned by automatic delay selection.
pub const DEFAULT_TAU_MAX: usize = 200;
/// Largest dimension tried by automatic dimension selection.
pub const DEFAULT_DIM_MAX: usize = 10;

/// Spread of the entropy curve below which it is treated as flat.
const FLAT_CURVE_SPREAD: f64 = 0.02;

/// Selects the delay at the first prominent maximum of the permutation
/// entropy curve: the first interior local maximum that reaches 95% of the
/// global maximum. A flat curve falls back to `tau_max / 2`.
pub fn select_delay_mpe(
    ts: &TimeSeries,
    n_pe: usize,
    tau_max: usize,
    exec: Execution,
) -> Result<DelaySelection> {
    if tau_max < 2 {
        return Err(Error::InvalidInput("tau_max must be at least 2".into()));
    }
    if n_pe < 2 {
        return Err(Error::InvalidInput(
            "permutation order must be at least 2".into(),
        ));
    }
    let xs = ts.samples();
    let span = tau_max * (n_pe - 1);
    if xs.len() <= span {
        return Err(Error::SignalTooShort {
            len: xs.len(),
            required: span,
        });
    }
    let curve = par::map_range(exec, tau_max, |k| permutation_entropy(xs, n_pe, k + 1))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let max = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = curve.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min < FLAT_CURVE_SPREAD {
        log::warn!("permutation entropy curve is flat; falling back to tau_max / 2");
        return Ok(DelaySelection {
            tau: (tau_max / 2).max(1),
            curve,
            no_prominent_peak: true,
        });
    }
    let peak = (1..curve.len() - 1)
        .find(|&i| curve[i] > curve[i - 1] && curve[i] > curve[i + 1] && curve[i] >= 0.95 * max);
    let idx = peak.unwrap_or_else(|| {
        curve
            .iter()
            .enumerate()
            .fold(0, |best, (i, &h)| if h > curve[best] { i } else { best })
    });
    Ok(DelaySelection {
        tau: idx + 1,
        curve,
        no_prominent_peak: false,
    })
}

/// Kennel false-nearest-neighbour parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FnnOptions {
    pub rtol: f64,
    pub atol: f64,
    /// A dimension is accepted once its FNN fraction drops below this.
    pub threshold: f64,
}

impl Default for FnnOptions {
    fn default() -> Self {
        FnnOptions {
            rtol: 15.0,
            atol: 2.0,
            threshold: 0.01,
        }
    }
}

/// Outcome of the false-nearest-neighbour search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionSelection {
    /// Smallest dimension whose FNN fraction is below threshold.
    pub base: usize,
    /// `base + 1`, capped at `n_max`.
    pub dimension: usize,
    /// FNN fraction for `n = 1 .. n_max`.
    pub fractions: Vec<f64>,
}

/// Fraction of false nearest neighbours when going from `n` to `n + 1`.
pub fn fnn_fraction(
    xs: &[f64],
    tau: usize,
    n: usize,
    opts: FnnOptions,
    exec: Execution,
) -> Result<f64> {
    let count = xs
        .len()
        .checked_sub(n * tau)
        .filter(|&c| c > 1)
        .ok_or(Error::SignalTooShort {
            len: xs.len(),
            required: n * tau + 1,
        })?;
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let spread = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    let flags = par::map_range(exec, count, |i| {
        let mut best = f64::INFINITY;
        let mut nn = usize::MAX;
        for j in 0..count {
            if j == i {
                continue;
            }
            let mut d2 = 0.0;
            for k in 0..n {
                let diff = xs[i + k * tau] - xs[j + k * tau];
                d2 += diff * diff;
                if d2 >= best {
                    break;
                }
            }
            if d2 > 0.0 && d2 < best {
                best = d2;
                nn = j;
            }
        }
        if nn == usize::MAX {
            return None;
        }
        let extra = (xs[i + n * tau] - xs[nn + n * tau]).abs();
        let r = best.sqrt();
        let r_next = (best + extra * extra).sqrt();
        Some(extra / r > opts.rtol || r_next / spread > opts.atol)
    });
    let tested = flags.iter().flatten().count();
    if tested == 0 {
        return Ok(0.0);
    }
    let false_count = flags.iter().flatten().filter(|&&f| f).count();
    Ok(false_count as f64 / tested as f64)
}

/// Picks the embedding dimension as one more than the smallest dimension
/// with less than 1% false nearest neighbours, capped at `n_max`.
pub fn select_dim_fnn(
    ts: &TimeSeries,
    tau: usize,
    n_max: usize,
    opts: FnnOptions,
    exec: Execution,
) -> Result<DimensionSelection> {
    if n_max < 2 {
        return Err(Error::InvalidInput("n_max must be at least 2".into()));
    }
    if tau < 1 {
        return Err(Error::InvalidInput("delay must be at least 1".into()));
    }
    if ts.max() == ts.min() {
        return Err(Error::DegenerateSignal);
    }
    let xs = ts.samples();
    if xs.len() <= n_max * tau + 1 {
        return Err(Error::SignalTooShort {
            len: xs.len(),
            required: n_max * tau + 1,
        });
    }
    let mut fractions = Vec::new();
    let mut base = None;
    for n in 1..n_max {
        let f = fnn_fraction(xs, tau, n, opts, exec)?;
        fractions.push(f);
        if f < opts.threshold {
            base = Some(n);
            break;
        }
    }
    let base = base.unwrap_or(n_max);
    Ok(DimensionSelection {
        base,
        dimension: (base + 1).min(n_max),
        fractions,
    })
}

/// Distance from each embedded vector to the line `x_1 = ... = x_n`.
pub fn hyperdiagonal_distance(emb: &Embedding) -> Vec<f64> {
    emb.vectors().map(distance_to_diagonal).collect()
}

pub fn distance_to_diagonal(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(xs: Vec<f64>) -> TimeSeries {
        TimeSeries::new(xs, 1.0).unwrap()
    }

    #[test]
    fn small_embeddings() {
        let ts = series(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let e = delay_embed(&ts, 1, 2).unwrap();
        let v: Vec<_> = e.vectors().map(|v| v.to_vec()).collect();
        assert_eq!(
            v,
            vec![
                vec![1.0, 2.0],
                vec![2.0, 3.0],
                vec![3.0, 4.0],
                vec![4.0, 5.0]
            ]
        );
        let e = delay_embed(&ts, 2, 2).unwrap();
        let v: Vec<_> = e.vectors().map(|v| v.to_vec()).collect();
        assert_eq!(v, vec![vec![1.0, 3.0], vec![2.0, 4.0], vec![3.0, 5.0]]);
        assert_eq!((e.source_min(), e.source_max()), (1.0, 5.0));
        assert!(matches!(delay_embed(&ts, 2, 3), Ok(_)));
        assert!(matches!(
            delay_embed(&ts, 2, 4),
            Err(Error::SignalTooShort { .. })
        ));
    }

    #[test]
    fn hyperdiagonal_examples() {
        assert!(distance_to_diagonal(&[3.5, 3.5, 3.5, 3.5]).abs() < 1e-15);
        assert!((distance_to_diagonal(&[1.0, -1.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert!((distance_to_diagonal(&[1.0, 0.0, 0.0]) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_signal_has_no_dimension() {
        let ts = series(vec![0.5; 200]);
        assert!(matches!(
            select_dim_fnn(&ts, 3, 4, FnnOptions::default(), Execution::Sequential),
            Err(Error::DegenerateSignal)
        ));
    }

    #[test]
    fn permutation_entropy_bounds() {
        let up: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(permutation_entropy(&up, 3, 1).unwrap(), 0.0);
    }
}
