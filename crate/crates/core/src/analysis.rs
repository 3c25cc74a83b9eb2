//! Experiment drivers: the series-to-diagram pipeline, MDS, SVM separation,
//! bin and noise sweeps, and the multi-system battery.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagstats::{self, bottleneck_matrix, DiagramSummary};
use crate::embedding::delay_embed;
use crate::error::{Error, Result};
use crate::graphdist::{compute_distance, DissimilarityMatrix, DistanceKind};
use crate::homology::{compute_diagrams, PersistenceDiagram};
use crate::networks::{build_network, symbolize, NetworkKind, Symbolizer, TransitionNetwork};
use crate::par::{self, Execution};
use crate::signals::{add_noise_snr, Preset, Regime, TimeSeries};

/// Everything needed to turn a series into a diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub tau: usize,
    pub dimension: usize,
    pub symbolizer: Symbolizer,
    pub distance: DistanceKind,
    pub diffusion_t: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub network: TransitionNetwork,
    pub diagram: PersistenceDiagram,
}

impl PipelineOutput {
    pub fn summary(&self) -> Result<DiagramSummary> {
        diagstats::summarize(&self.diagram.dim1)
    }
}

pub fn run_pipeline(
    ts: &TimeSeries,
    cfg: &PipelineConfig,
    exec: Execution,
) -> Result<PipelineOutput> {
    let emb = delay_embed(ts, cfg.tau, cfg.dimension)?;
    let seq = symbolize(&emb, cfg.symbolizer)?;
    let network = build_network(&seq)?;
    let d = compute_distance(&network, cfg.distance, cfg.diffusion_t, exec)?;
    let diagram = compute_diagrams(&d)?;
    Ok(PipelineOutput { network, diagram })
}

/// Classical (Torgerson) MDS to the plane.
///
/// Coordinates are the top two eigenvectors of `-J D² J / 2` scaled by the
/// square roots of their eigenvalues, negative eigenvalues clamped to 0.
/// Each axis is flipped so its first nonzero coordinate is positive.
pub fn mds_2d(d: &DissimilarityMatrix) -> Vec<(f64, f64)> {
    let n = d.size();
    if n == 0 {
        return Vec::new();
    }
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j).powi(2));
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let total_mean = row_mean.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + total_mean)
    });
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| {
        eig.eigenvalues[c]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&c))
    });

    let scale = d.values().iter().copied().fold(0.0, f64::max);
    let axis = |k: usize| -> Vec<f64> {
        let Some(&idx) = order.get(k) else {
            return vec![0.0; n];
        };
        let lambda = eig.eigenvalues[idx].max(0.0);
        let mut col: Vec<f64> = eig
            .eigenvectors
            .column(idx)
            .iter()
            .map(|v| v * lambda.sqrt())
            .collect();
        // first coordinate that is nonzero relative to the data scale
        let flip = col
            .iter()
            .find(|v| v.abs() > 1e-9 * scale.max(f64::MIN_POSITIVE))
            .is_some_and(|&v| v < 0.0);
        if flip {
            col.iter_mut().for_each(|v| *v = -*v);
        }
        if lambda == 0.0 {
            col.iter_mut().for_each(|v| *v = 0.0);
        }
        col
    };
    let (x, y) = (axis(0), axis(1));
    x.into_iter().zip(y).collect()
}

/// Points in the MDS plane with their regime labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledEmbedding2D {
    pub points: Vec<(f64, f64)>,
    pub labels: Vec<Regime>,
    pub names: Vec<String>,
    pub network: NetworkKind,
    pub distance: DistanceKind,
}

/// Soft-margin RBF-kernel SVM in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub gamma: f64,
    pub c: f64,
    support: Vec<(f64, f64)>,
    /// `alpha_i * y_i` per support point.
    coef: Vec<f64>,
    rho: f64,
}

impl SvmModel {
    pub fn decision(&self, p: (f64, f64)) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(&s, &a)| a * rbf(self.gamma, s, p))
            .sum::<f64>()
            - self.rho
    }

    /// True for the positive class.
    pub fn predict(&self, p: (f64, f64)) -> bool {
        self.decision(p) > 0.0
    }
}

fn rbf(gamma: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    (-gamma * ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2))).exp()
}

/// `1 / (2 Var)` over all coordinates, or 1 when they are all equal.
pub fn default_gamma(points: &[(f64, f64)]) -> f64 {
    let all: Vec<f64> = points.iter().flat_map(|&(x, y)| [x, y]).collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let var = all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / all.len() as f64;
    if var > 0.0 {
        1.0 / (2.0 * var)
    } else {
        1.0
    }
}

const SMO_TOLERANCE: f64 = 1e-6;

/// Trains the dual problem with SMO and maximal-violating-pair selection.
///
/// `seed` permutes the scan order, which only decides between equally
/// violating pairs.
pub fn train_svm(
    points: &[(f64, f64)],
    positive: &[bool],
    c: f64,
    gamma: f64,
    seed: u64,
) -> Result<SvmModel> {
    let n = points.len();
    let npos = positive.iter().filter(|&&p| p).count();
    if n != positive.len() {
        return Err(Error::InvalidInput("one label per point required".into()));
    }
    if npos == 0 || npos == n {
        return Err(Error::SingleClass);
    }
    let y: Vec<f64> = positive
        .iter()
        .map(|&p| if p { 1.0 } else { -1.0 })
        .collect();
    let k: Vec<f64> = (0..n * n)
        .map(|t| rbf(gamma, points[t / n], points[t % n]))
        .collect();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt < 0.0 && a < c) || (yt > 0.0 && a > 0.0);

    let max_iter = 100_000.max(100 * n * n);
    for _ in 0..max_iter {
        let (mut i, mut gmax) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut gmin) = (usize::MAX, f64::INFINITY);
        for &t in &order {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                (i, gmax) = (t, v);
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                (j, gmin) = (t, v);
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < SMO_TOLERANCE {
            break;
        }
        let a = (k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j]).max(1e-12);
        let mut step = (gmax - gmin) / a;
        step = step.min(if y[i] > 0.0 { c - alpha[i] } else { alpha[i] });
        step = step.min(if y[j] > 0.0 { alpha[j] } else { c - alpha[j] });
        let (di, dj) = (y[i] * step, -y[j] * step);
        alpha[i] += di;
        alpha[j] += dj;
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper == at_lower {
            free += 1;
            free_sum += yg;
        } else if at_upper == (y[t] < 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };

    let mut support = Vec::new();
    let mut coef = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support.push(points[t]);
            coef.push(alpha[t] * y[t]);
        }
    }
    Ok(SvmModel {
        gamma,
        c,
        support,
        coef,
        rho,
    })
}

/// Training-set accuracy of an RBF SVM with `C = 1` and the default gamma.
pub fn svm_rbf_separation(points: &[(f64, f64)], labels: &[Regime], seed: u64) -> Result<f64> {
    for regime in [Regime::Periodic, Regime::Chaotic] {
        if labels.iter().filter(|&&l| l == regime).count() < 2 {
            return Err(Error::SingleClass);
        }
    }
    let positive: Vec<bool> = labels.iter().map(|&l| l == Regime::Chaotic).collect();
    let model = train_svm(points, &positive, 1.0, default_gamma(points), seed)?;
    let correct = points
        .iter()
        .zip(&positive)
        .filter(|&(&p, &pos)| model.predict(p) == pos)
        .count();
    Ok(correct as f64 / points.len() as f64)
}

/// Per-series curves of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub label: String,
    pub entropy: Vec<f64>,
    /// Standard deviation across seeds; zero for deterministic sweeps.
    pub entropy_std: Vec<f64>,
    pub max_lifetime: Vec<f64>,
    pub compute_time_s: Vec<f64>,
    /// Per-point failure, with the statistics at that point set to NaN.
    pub errors: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Bin counts or SNR values in dB.
    pub x_values: Vec<f64>,
    pub series: Vec<SweepSeries>,
}

impl SweepResult {
    /// Long-format CSV: `label,x,entropy,entropy_std,max_lifetime[,compute_time_s],error`.
    ///
    /// Timing is optional because it differs between otherwise identical runs.
    pub fn write_csv<W: std::io::Write>(&self, out: W, with_timing: bool) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut header = vec!["label", "x", "entropy", "entropy_std", "max_lifetime"];
        if with_timing {
            header.push("compute_time_s");
        }
        header.push("error");
        wtr.write_record(&header).map_err(io)?;
        for s in &self.series {
            for (k, x) in self.x_values.iter().enumerate() {
                let mut row = vec![
                    s.label.clone(),
                    x.to_string(),
                    s.entropy[k].to_string(),
                    s.entropy_std[k].to_string(),
                    s.max_lifetime[k].to_string(),
                ];
                if with_timing {
                    row.push(s.compute_time_s[k].to_string());
                }
                row.push(s.errors[k].clone().unwrap_or_default());
                wtr.write_record(&row).map_err(io)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

fn check_monotone(xs: &[f64]) -> Result<()> {
    let up = xs.windows(2).all(|w| w[0] < w[1]);
    let down = xs.windows(2).all(|w| w[0] > w[1]);
    if xs.is_empty() || !(up || down) {
        return Err(Error::InvalidInput(
            "sweep values must be strictly monotone".into(),
        ));
    }
    Ok(())
}

/// Coarse-grained network statistics for each bin count in `bins`.
///
/// A failure at one bin count (for example a degenerate symbol sequence or
/// an undefined entropy) is recorded for that point and the sweep goes on.
pub fn bin_sweep(
    ts: &TimeSeries,
    tau: usize,
    dimension: usize,
    bins: &[usize],
    distance: DistanceKind,
    exec: Execution,
) -> Result<SweepResult> {
    let xs: Vec<f64> = bins.iter().map(|&b| b as f64).collect();
    check_monotone(&xs)?;
    if let Some(&b) = bins.iter().find(|&&b| !(2..=20).contains(&b)) {
        return Err(Error::InvalidInput(format!("bin count {b} outside 2..=20")));
    }
    let points = par::map_slice(exec, bins, |&b| {
        let cfg = PipelineConfig {
            tau,
            dimension,
            symbolizer: Symbolizer::Coarse { bins: b },
            distance,
            diffusion_t: None,
        };
        let start = Instant::now();
        // the inner stages run sequentially; the sweep itself is the parallel axis
        let result = run_pipeline(ts, &cfg, Execution::Sequential).and_then(|out| out.summary());
        (result, start.elapsed().as_secs_f64())
    });
    let mut series = SweepSeries {
        label: ts.label().unwrap_or("signal").to_string(),
        entropy: Vec::new(),
        entropy_std: Vec::new(),
        max_lifetime: Vec::new(),
        compute_time_s: Vec::new(),
        errors: Vec::new(),
    };
    for (result, secs) in points {
        series.compute_time_s.push(secs);
        series.entropy_std.push(0.0);
        match result {
            Ok(s) => {
                series.entropy.push(s.entropy);
                series.max_lifetime.push(s.max_lifetime);
                series.errors.push(None);
            }
            Err(e) => {
                series.entropy.push(f64::NAN);
                series.max_lifetime.push(f64::NAN);
                series.errors.push(Some(e.to_string()));
            }
        }
    }
    Ok(SweepResult {
        x_values: xs,
        series: vec![series],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepResult {
    pub sweep: SweepResult,
    /// Lowest SNR reached, scanning from the cleanest signal down, before
    /// the periodic and chaotic mean ± stdev entropy intervals first
    /// overlap. `None` if they overlap at the cleanest point.
    pub breakdown_snr_db: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    (m, v.sqrt())
}

/// Offset between the noise streams of the two regimes.
const CHAOTIC_SEED_OFFSET: u64 = 1 << 32;

/// Entropy of the periodic and chaotic series under additive white noise at
/// each SNR, averaged over `seeds`.
pub fn noise_sweep(
    periodic: &TimeSeries,
    chaotic: &TimeSeries,
    snr_db: &[f64],
    cfg: &PipelineConfig,
    seeds: &[u64],
    exec: Execution,
) -> Result<NoiseSweepResult> {
    check_monotone(snr_db)?;
    if seeds.is_empty() {
        return Err(Error::InvalidInput("at least one seed required".into()));
    }
    let grid: Vec<(usize, usize, usize)> = (0..snr_db.len())
        .flat_map(|k| (0..2).flat_map(move |r| (0..seeds.len()).map(move |s| (k, r, s))))
        .collect();
    let runs = par::map_slice(exec, &grid, |&(k, r, s)| -> Result<(f64, f64, f64)> {
        let (ts, offset) = if r == 0 {
            (periodic, 0)
        } else {
            (chaotic, CHAOTIC_SEED_OFFSET)
        };
        let start = Instant::now();
        let noisy = add_noise_snr(ts, snr_db[k], seeds[s].wrapping_add(offset))?;
        let summary = run_pipeline(&noisy, cfg, Execution::Sequential)?.summary()?;
        Ok((
            summary.entropy,
            summary.max_lifetime,
            start.elapsed().as_secs_f64(),
        ))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let labels = [
        periodic.label().unwrap_or("periodic").to_string(),
        chaotic.label().unwrap_or("chaotic").to_string(),
    ];
    let mut series: Vec<SweepSeries> = labels
        .iter()
        .map(|l| SweepSeries {
            label: l.clone(),
            entropy: Vec::new(),
            entropy_std: Vec::new(),
            max_lifetime: Vec::new(),
            compute_time_s: Vec::new(),
            errors: Vec::new(),
        })
        .collect();
    let per_point = seeds.len();
    for (chunk_idx, chunk) in runs.chunks(per_point).enumerate() {
        let s = &mut series[chunk_idx % 2];
        let e: Vec<f64> = chunk.iter().map(|r| r.0).collect();
        let l: Vec<f64> = chunk.iter().map(|r| r.1).collect();
        let (m, sd) = mean_std(&e);
        s.entropy.push(m);
        s.entropy_std.push(sd);
        s.max_lifetime.push(mean_std(&l).0);
        s.compute_time_s.push(chunk.iter().map(|r| r.2).sum());
        s.errors.push(None);
    }

    let mut order: Vec<usize> = (0..snr_db.len()).collect();
    order.sort_by(|&a, &b| snr_db[b].total_cmp(&snr_db[a]));
    let separated = |k: usize| {
        let (p, c) = (&series[0], &series[1]);
        let (plo, phi) = (
            p.entropy[k] - p.entropy_std[k],
            p.entropy[k] + p.entropy_std[k],
        );
        let (clo, chi) = (
            c.entropy[k] - c.entropy_std[k],
            c.entropy[k] + c.entropy_std[k],
        );
        phi < clo || chi < plo
    };
    let mut breakdown = None;
    for k in order {
        if !separated(k) {
            break;
        }
        breakdown = Some(snr_db[k]);
    }
    Ok(NoiseSweepResult {
        sweep: SweepResult {
            x_values: snr_db.to_vec(),
            series,
        },
        breakdown_snr_db: breakdown,
    })
}

/// One labeled input of the battery.
#[derive(Debug, Clone)]
pub struct BatteryEntry {
    pub series: TimeSeries,
    pub regime: Regime,
    pub tau: usize,
    pub dimension: usize,
}

impl BatteryEntry {
    /// Simulates a preset with its bundled embedding parameters for the
    /// given network kind.
    pub fn from_preset(p: &Preset, symbolizer: Symbolizer) -> Result<Self> {
        let dimension = match symbolizer.kind() {
            NetworkKind::Ordinal => p.ordinal_dim,
            NetworkKind::Coarse => p.coarse_dim,
        };
        Ok(BatteryEntry {
            series: p.simulate()?.with_label(p.name.clone()),
            regime: p.system.regime,
            tau: p.tau,
            dimension,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryResult {
    pub bottleneck: Vec<Vec<f64>>,
    pub embedding: LabeledEmbedding2D,
    /// Accuracy for each seed in order.
    pub accuracies: Vec<f64>,
    pub seeds: Vec<u64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Series that failed, with the reason; they are left out of the rest.
    pub skipped: Vec<(String, String)>,
}

/// Full pipeline on every entry, then the pairwise bottleneck distances of
/// the one-dimensional diagrams, their MDS plane and the SVM separation
/// accuracy for each seed.
pub fn battery(
    entries: &[BatteryEntry],
    symbolizer: Symbolizer,
    distance: DistanceKind,
    diffusion_t: Option<usize>,
    seeds: &[u64],
    exec: Execution,
) -> Result<BatteryResult> {
    let outputs = par::map_slice(exec, entries, |e| {
        let cfg = PipelineConfig {
            tau: e.tau,
            dimension: e.dimension,
            symbolizer,
            distance,
            diffusion_t,
        };
        run_pipeline(&e.series, &cfg, Execution::Sequential)
    });
    let mut diagrams = Vec::new();
    let mut labels = Vec::new();
    let mut names = Vec::new();
    let mut skipped = Vec::new();
    for (i, (entry, out)) in entries.iter().zip(outputs).enumerate() {
        let name = entry
            .series
            .label()
            .map_or_else(|| format!("series-{i}"), str::to_string);
        match out {
            Ok(out) => {
                diagrams.push(out.diagram.dim1);
                labels.push(entry.regime);
                names.push(name);
            }
            Err(e) => {
                log::warn!("skipping {name}: {e}");
                skipped.push((name, e.to_string()));
            }
        }
    }
    let matrix = bottleneck_matrix(&diagrams, exec);
    let points = mds_2d(&matrix);
    let accuracies = par::map_slice(exec, seeds, |&s| svm_rbf_separation(&points, &labels, s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (mean_accuracy, std_accuracy) = mean_std(&accuracies);
    Ok(BatteryResult {
        bottleneck: (0..matrix.size()).map(|i| matrix.row(i).to_vec()).collect(),
        embedding: LabeledEmbedding2D {
            points,
            labels,
            names,
            network: symbolizer.kind(),
            distance,
        },
        accuracies,
        seeds: seeds.to_vec(),
        mean_accuracy,
        std_accuracy,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(pts: &[(f64, f64)]) -> DissimilarityMatrix {
        let rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| {
                pts.iter()
                    .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                    .collect()
            })
            .collect();
        DissimilarityMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn mds_recovers_square() {
        let d = euclid(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let back = euclid(&mds_2d(&d));
        for (a, b) in d.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mds_equilateral_and_zero() {
        let d = DissimilarityMatrix::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let back = euclid(&mds_2d(&d));
        for (a, b) in d.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-9);
        }
        let zero = DissimilarityMatrix::new(3, vec![0.0; 9]).unwrap();
        assert!(mds_2d(&zero).iter().all(|&p| p == (0.0, 0.0)));
    }

    #[test]
    fn svm_separates_blobs() {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for k in 0..10 {
            let t = k as f64 * 0.1;
            pts.push((t.cos() * 0.3, t.sin() * 0.3));
            labels.push(Regime::Periodic);
            pts.push((5.0 + t.cos() * 0.3, 5.0 + t.sin() * 0.3));
            labels.push(Regime::Chaotic);
        }
        for seed in 1..=5 {
            assert_eq!(svm_rbf_separation(&pts, &labels, seed).unwrap(), 1.0);
        }
    }

    #[test]
    fn coincident_points_cannot_be_separated() {
        let pts = vec![(0.0, 0.0); 4];
        let labels = [
            Regime::Periodic,
            Regime::Chaotic,
            Regime::Periodic,
            Regime::Chaotic,
        ];
        assert_eq!(svm_rbf_separation(&pts, &labels, 1).unwrap(), 0.5);
        assert!(matches!(
            svm_rbf_separation(&pts, &[Regime::Periodic; 4], 1),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn gamma_from_variance() {
        assert_eq!(default_gamma(&[(1.0, 1.0), (1.0, 1.0)]), 1.0);
        // coordinates {0, 0, 2, 2}: variance 1
        assert_eq!(default_gamma(&[(0.0, 0.0), (2.0, 2.0)]), 0.5);
    }

    #[test]
    fn bin_sweep_reports_point_errors() {
        let ts = TimeSeries::new(vec![1.0; 50], 1.0).unwrap();
        let r = bin_sweep(
            &ts,
            1,
            2,
            &[2],
            DistanceKind::UnweightedShortest,
            Execution::Sequential,
        )
        .unwrap();
        assert!(r.series[0].errors[0].is_some());
        assert!(r.series[0].entropy[0].is_nan());
        assert!(bin_sweep(
            &ts,
            1,
            2,
            &[1],
            DistanceKind::UnweightedShortest,
            Execution::Sequential
        )
        .is_err());
        assert!(bin_sweep(
            &ts,
            1,
            2,
            &[3, 3],
            DistanceKind::UnweightedShortest,
            Execution::Sequential
        )
        .is_err());
    }

    #[test]
    fn breakdown_scans_from_clean_end() {
        let wave = |second: f64| {
            let xs = (0..400).map(|i| {
                let t = i as f64;
                (t * 0.37).sin() + second * (t * 0.91).sin()
            });
            TimeSeries::new(xs.collect(), 1.0).unwrap()
        };
        let cfg = PipelineConfig {
            tau: 2,
            dimension: 3,
            symbolizer: Symbolizer::Ordinal,
            distance: DistanceKind::UnweightedShortest,
            diffusion_t: None,
        };
        let r = noise_sweep(
            &wave(0.5),
            &wave(0.5),
            &[f64::INFINITY, 40.0],
            &cfg,
            &[1],
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(r.sweep.series.len(), 2);
        // identical clean inputs overlap at the first point
        assert_eq!(r.breakdown_snr_db, None);

        // a single loop has no defined entropy and the error surfaces
        let err = noise_sweep(
            &wave(0.0),
            &wave(0.5),
            &[f64::INFINITY],
            &cfg,
            &[1],
            Execution::Sequential,
        );
        assert!(matches!(err, Err(Error::EntropyUndefined)));
    }
}
