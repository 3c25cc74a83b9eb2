use std::fs;
use std::path::{Path, PathBuf};

use cgnet::analysis::{
    battery, bin_sweep, default_gamma, mds_2d, noise_sweep, train_svm, BatteryEntry,
    PipelineConfig, SweepResult,
};
use cgnet::diagstats::{
    bottleneck_matrix, persistent_entropy_with, summarize, EntropyNormalization,
};
use cgnet::embedding::{
    delay_embed, select_delay_mpe, select_dim_fnn, FnnOptions, DEFAULT_DIM_MAX, DEFAULT_PE_ORDER,
    DEFAULT_TAU_MAX,
};
use cgnet::graphdist::{compute_distance, DissimilarityMatrix, DistanceKind};
use cgnet::homology::{compute_diagrams, PersistenceDiagram};
use cgnet::networks::{build_network, symbolize, NetworkKind, Symbolizer};
use cgnet::par::{configure_workers, Execution};
use cgnet::signals::{ingest_csv, preset, presets, Preset, Regime, TimeSeries};
use serde_json::{json, Value};

use crate::args::*;
use crate::{compute, invalid, plot, repro, Failure};

pub type Outcome = Result<Value, Failure>;

const EXEC: Execution = Execution::Parallel;

/// Artifacts held in memory until the command has finished, so a failed
/// run leaves the output directory untouched.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn json(&mut self, name: &str, value: &Value) {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        text.push('\n');
        self.add(name, text.into_bytes());
    }

    /// Buffers the output of a CSV writer.
    pub fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut Vec<u8>) -> cgnet::Result<()>,
    ) -> Result<(), Failure> {
        let mut buf = Vec::new();
        write(&mut buf).map_err(compute)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn svg(
        &mut self,
        name: &str,
        render: Result<String, Box<dyn std::error::Error>>,
    ) -> Result<(), Failure> {
        self.add(name, render.map_err(compute)?.into_bytes());
        Ok(())
    }

    /// Writes every buffered file and returns their paths.
    pub fn commit(self) -> Result<Vec<String>, Failure> {
        fs::create_dir_all(&self.dir).map_err(compute)?;
        let mut paths = Vec::new();
        for (name, bytes) in self.files {
            let path = self.dir.join(&name);
            fs::write(&path, bytes).map_err(compute)?;
            paths.push(path.display().to_string());
        }
        Ok(paths)
    }
}

/// Merges the written paths into a summary object.
pub fn finish(outputs: Outputs, mut summary: Value) -> Outcome {
    let paths = outputs.commit()?;
    summary["outputs"] = json!(paths);
    Ok(summary)
}

pub fn run(cli: Cli) -> Outcome {
    let common = cli.common;
    if let Some(jobs) = common.jobs {
        configure_workers(jobs).map_err(|e| invalid(e.to_string()))?;
    }
    let out = Outputs::new(&common.out);
    match cli.command {
        Command::Simulate { system } => simulate(&system, out),
        Command::Embed(a) => embed(&a, out),
        Command::Network(a) => network(&a, out),
        Command::Persist(a) => persist(&a, out),
        Command::Entropy(a) => entropy(&a, out),
        Command::Bottleneck(a) => bottleneck(&a, out),
        Command::Mds(a) => mds(&a, &common, out),
        Command::Battery(a) => run_battery(&a, &common, out),
        Command::BinSweep(a) => run_bin_sweep(&a, &common, out),
        Command::NoiseSweep(a) => run_noise_sweep(&a, &common, out),
        Command::Repro { name } => repro::run(&name, &common, out),
    }
}

// ---- validation ------------------------------------------------------------

pub fn lookup_preset(name: &str) -> Result<Preset, Failure> {
    preset(name).map_err(|_| {
        let known: Vec<String> = presets().into_iter().map(|p| p.name).collect();
        invalid(format!(
            "unknown system `{name}`; known: {}",
            known.join(", ")
        ))
    })
}

pub enum Source {
    Preset(Preset),
    Series(TimeSeries),
}

impl Source {
    fn preset(&self) -> Option<&Preset> {
        match self {
            Source::Preset(p) => Some(p),
            Source::Series(_) => None,
        }
    }

    fn series(&self) -> Result<TimeSeries, Failure> {
        match self {
            Source::Preset(p) => p
                .simulate()
                .map(|ts| ts.with_label(p.name.clone()))
                .map_err(compute),
            Source::Series(ts) => Ok(ts.clone()),
        }
    }
}

fn resolve_input(a: &InputArgs) -> Result<Source, Failure> {
    match (&a.system, &a.csv) {
        (Some(name), None) => Ok(Source::Preset(lookup_preset(name)?)),
        (None, Some(path)) => {
            let fs = a.fs.ok_or_else(|| invalid("--csv needs --fs"))?;
            if !(fs.is_finite() && fs > 0.0) {
                return Err(invalid("--fs must be a positive number"));
            }
            ingest_csv(path, fs, a.column)
                .map(|ts| Source::Series(ts.with_label(path.display().to_string())))
                .map_err(|e| invalid(format!("{}: {e}", path.display())))
        }
        _ => Err(invalid("give exactly one of --system or --csv")),
    }
}

#[derive(Clone, Copy)]
enum Param {
    Fixed(usize),
    Auto,
}

struct EmbedPlan {
    tau: Param,
    dim: Param,
}

fn plan_embedding(
    a: &EmbedArgs,
    preset: Option<&Preset>,
    kind: NetworkKind,
) -> Result<EmbedPlan, Failure> {
    let tau = match (a.tau, a.auto_tau, preset) {
        (Some(0), ..) => return Err(invalid("--tau must be at least 1")),
        (Some(t), ..) => Param::Fixed(t),
        (None, true, _) => Param::Auto,
        (None, false, Some(p)) => Param::Fixed(p.tau),
        (None, false, None) => return Err(invalid("give --tau or --auto-tau")),
    };
    let dim = match (a.dim, a.auto_dim, preset) {
        (Some(0), ..) => return Err(invalid("--dim must be at least 1")),
        (Some(1), ..) if kind == NetworkKind::Ordinal => {
            return Err(invalid("ordinal networks need --dim of at least 2"))
        }
        (Some(n), ..) => Param::Fixed(n),
        (None, true, _) => Param::Auto,
        (None, false, Some(p)) => Param::Fixed(match kind {
            NetworkKind::Ordinal => p.ordinal_dim,
            NetworkKind::Coarse => p.coarse_dim,
        }),
        (None, false, None) => return Err(invalid("give --dim or --auto-dim")),
    };
    Ok(EmbedPlan { tau, dim })
}

impl EmbedPlan {
    /// Resolves automatic choices against the series.
    fn resolve(&self, ts: &TimeSeries) -> Result<(usize, usize, Value), Failure> {
        let mut notes = json!({});
        let tau = match self.tau {
            Param::Fixed(t) => t,
            Param::Auto => {
                let sel = select_delay_mpe(ts, DEFAULT_PE_ORDER, DEFAULT_TAU_MAX, EXEC)
                    .map_err(compute)?;
                notes["auto_tau"] =
                    json!({ "no_prominent_peak": sel.no_prominent_peak, "curve": sel.curve });
                sel.tau
            }
        };
        let dim = match self.dim {
            Param::Fixed(n) => n,
            Param::Auto => {
                let sel = select_dim_fnn(ts, tau, DEFAULT_DIM_MAX, FnnOptions::default(), EXEC)
                    .map_err(compute)?;
                notes["auto_dim"] = json!({ "base": sel.base, "fnn_fractions": sel.fractions });
                sel.dimension
            }
        };
        Ok((tau, dim, notes))
    }
}

fn symbolizer(a: &NetworkArgs) -> Result<Symbolizer, Failure> {
    match (a.kind, a.bins) {
        (KindArg::Ordinal, Some(_)) => Err(invalid("--bins only applies to --kind coarse")),
        (KindArg::Ordinal, None) => Ok(Symbolizer::Ordinal),
        (KindArg::Coarse, Some(b)) if b < 2 => Err(invalid("--bins must be at least 2")),
        (KindArg::Coarse, b) => Ok(Symbolizer::Coarse {
            bins: b.unwrap_or(12),
        }),
    }
}

fn distance(a: &DistanceArgs) -> Result<(DistanceKind, Option<usize>), Failure> {
    let kind = match a.distance {
        DistanceArg::Unweighted => DistanceKind::UnweightedShortest,
        DistanceArg::ShortestWeighted => DistanceKind::ShortestWeighted,
        DistanceArg::WeightedShortest => DistanceKind::WeightedShortest,
        DistanceArg::Diffusion => DistanceKind::Diffusion,
    };
    match a.diffusion_t {
        Some(_) if kind != DistanceKind::Diffusion => Err(invalid(
            "--diffusion-t only applies to --distance diffusion",
        )),
        Some(0) => Err(invalid("--diffusion-t must be at least 1")),
        t => Ok((kind, t)),
    }
}

pub fn seed_range(start: u64, count: u64) -> Result<Vec<u64>, Failure> {
    if count == 0 {
        return Err(invalid("--seeds must be at least 1"));
    }
    let end = start
        .checked_add(count - 1)
        .ok_or_else(|| invalid("seed range overflows"))?;
    Ok((start..=end).collect())
}

fn read_diagram(path: &Path) -> Result<PersistenceDiagram, Failure> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    PersistenceDiagram::from_json(&value).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

// ---- subcommands -------------------------------------------------------------

fn simulate(system: &str, mut out: Outputs) -> Outcome {
    let p = lookup_preset(system)?;
    let ts = p.simulate().map_err(compute)?;
    out.csv("series.csv", |buf| write_series(buf, &ts))?;
    finish(
        out,
        json!({ "system": p.name, "samples": ts.len(), "sample_rate": ts.sample_rate() }),
    )
}

pub fn write_series(buf: &mut Vec<u8>, ts: &TimeSeries) -> cgnet::Result<()> {
    use std::io::Write;
    writeln!(buf, "t,x")?;
    for (i, x) in ts.samples().iter().enumerate() {
        writeln!(buf, "{},{}", i as f64 / ts.sample_rate(), x)?;
    }
    Ok(())
}

struct Prepared {
    series: TimeSeries,
    tau: usize,
    dim: usize,
    notes: Value,
    symbolizer: Symbolizer,
}

fn prepare(a: &PipelineArgs) -> Result<Prepared, Failure> {
    let source = resolve_input(&a.input)?;
    let symbolizer = symbolizer(&a.network)?;
    let plan = plan_embedding(&a.embed, source.preset(), symbolizer.kind())?;
    let series = source.series()?;
    let (tau, dim, notes) = plan.resolve(&series)?;
    Ok(Prepared {
        series,
        tau,
        dim,
        notes,
        symbolizer,
    })
}

fn embed(a: &PipelineArgs, mut out: Outputs) -> Outcome {
    let p = prepare(a)?;
    let emb = delay_embed(&p.series, p.tau, p.dim).map_err(compute)?;
    out.csv("embedding.csv", |buf| {
        use std::io::Write;
        let header: Vec<String> = (0..p.dim).map(|k| format!("x{k}")).collect();
        writeln!(buf, "{}", header.join(","))?;
        for v in emb.vectors() {
            let row: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            writeln!(buf, "{}", row.join(","))?;
        }
        Ok(())
    })?;
    let meta =
        json!({ "tau": p.tau, "dimension": p.dim, "vectors": emb.len(), "selection": p.notes });
    out.json("embedding.json", &meta);
    finish(
        out,
        json!({ "tau": p.tau, "dimension": p.dim, "vectors": emb.len() }),
    )
}

fn network(a: &PipelineArgs, mut out: Outputs) -> Outcome {
    let p = prepare(a)?;
    let emb = delay_embed(&p.series, p.tau, p.dim).map_err(compute)?;
    let net = build_network(&symbolize(&emb, p.symbolizer).map_err(compute)?).map_err(compute)?;
    out.csv("edges.csv", |buf| net.write_edge_list(buf))?;
    out.json("network.json", &net.to_json());
    finish(
        out,
        json!({
            "kind": p.symbolizer.kind().as_str(),
            "tau": p.tau,
            "dimension": p.dim,
            "nodes": net.node_count(),
            "edges": net.edge_count(),
        }),
    )
}

pub fn diagram_summary(dgm: &PersistenceDiagram) -> Value {
    let mut v = json!({ "dim0_pairs": dgm.dim0.len(), "dim1_pairs": dgm.dim1.len() });
    match summarize(&dgm.dim1) {
        Ok(s) => {
            v["entropy"] = json!(s.entropy);
            v["max_lifetime"] = json!(s.max_lifetime);
            v["empty_diagram"] = json!(s.empty_diagram);
        }
        Err(e) => {
            v["entropy"] = Value::Null;
            v["entropy_error"] = json!(e.to_string());
        }
    }
    v
}

fn persist(a: &PersistArgs, mut out: Outputs) -> Outcome {
    let (kind, t) = distance(&a.distance)?;
    let p = prepare(&a.pipeline)?;
    let emb = delay_embed(&p.series, p.tau, p.dim).map_err(compute)?;
    let net = build_network(&symbolize(&emb, p.symbolizer).map_err(compute)?).map_err(compute)?;
    let d = compute_distance(&net, kind, t, EXEC).map_err(compute)?;
    let dgm = compute_diagrams(&d).map_err(compute)?;
    out.csv("distance.csv", |buf| d.write_csv(buf))?;
    out.json("distance.json", &d.sidecar_json());
    out.json("diagram.json", &dgm.to_json());
    let mut summary = diagram_summary(&dgm);
    summary["nodes"] = json!(net.node_count());
    summary["kind"] = json!(p.symbolizer.kind().as_str());
    summary["distance"] = json!(kind.as_str());
    summary["tau"] = json!(p.tau);
    summary["dimension"] = json!(p.dim);
    finish(out, summary)
}

fn entropy(a: &EntropyArgs, mut out: Outputs) -> Outcome {
    let dgm = read_diagram(&a.diagram)?;
    let norm = match a.normalization {
        NormalizationArg::Total => EntropyNormalization::TotalPersistence,
        NormalizationArg::Pairs => EntropyNormalization::PairCount,
    };
    let pairs = dgm.dimension(a.homology as usize);
    let e = persistent_entropy_with(pairs, norm).map_err(compute)?;
    let body = json!({
        "homology": a.homology,
        "normalization": norm,
        "entropy": e.value,
        "empty_diagram": e.empty_diagram,
        "pairs": pairs.len(),
    });
    out.json("entropy.json", &body);
    finish(out, body)
}

fn load_diagrams(a: &DiagramFiles) -> Result<(Vec<String>, Vec<Vec<(f64, f64)>>), Failure> {
    if a.diagrams.len() < 2 {
        return Err(invalid("give at least two --diagram files"));
    }
    let mut names = Vec::new();
    let mut pairs = Vec::new();
    for path in &a.diagrams {
        pairs.push(read_diagram(path)?.dimension(a.homology as usize).to_vec());
        names.push(path.display().to_string());
    }
    Ok((names, pairs))
}

fn write_matrix(
    out: &mut Outputs,
    name: &str,
    names: &[String],
    m: &DissimilarityMatrix,
) -> Result<(), Failure> {
    out.csv(name, |buf| {
        use std::io::Write;
        writeln!(buf, "name,{}", names.join(","))?;
        for (i, n) in names.iter().enumerate() {
            let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(buf, "{n},{}", row.join(","))?;
        }
        Ok(())
    })
}

fn bottleneck(a: &DiagramFiles, mut out: Outputs) -> Outcome {
    let (names, pairs) = load_diagrams(a)?;
    let m = bottleneck_matrix(&pairs, EXEC);
    write_matrix(&mut out, "bottleneck.csv", &names, &m)?;
    let summary = if names.len() == 2 {
        json!({ "distance": m.get(0, 1) })
    } else {
        json!({ "diagrams": names.len() })
    };
    finish(out, summary)
}

fn write_points(
    out: &mut Outputs,
    names: &[String],
    labels: Option<&[Regime]>,
    points: &[(f64, f64)],
) -> Result<(), Failure> {
    out.csv("mds.csv", |buf| {
        use std::io::Write;
        writeln!(buf, "name,regime,x,y")?;
        for (k, (n, p)) in names.iter().zip(points).enumerate() {
            let regime = labels.map_or("", |l| l[k].as_str());
            writeln!(buf, "{n},{regime},{},{}", p.0, p.1)?;
        }
        Ok(())
    })
}

fn mds(a: &DiagramFiles, common: &CommonArgs, mut out: Outputs) -> Outcome {
    let (names, pairs) = load_diagrams(a)?;
    let m = bottleneck_matrix(&pairs, EXEC);
    let points = mds_2d(&m);
    write_matrix(&mut out, "bottleneck.csv", &names, &m)?;
    write_points(&mut out, &names, None, &points)?;
    if common.plot {
        out.svg("mds.svg", plot::mds_scatter(&points, None, None))?;
    }
    finish(out, json!({ "diagrams": names.len() }))
}

fn run_battery(a: &BatteryArgs, common: &CommonArgs, mut out: Outputs) -> Outcome {
    let sym = symbolizer(&a.network)?;
    let (kind, t) = distance(&a.distance)?;
    let chosen: Vec<Preset> = if a.systems.is_empty() {
        presets()
    } else {
        a.systems
            .iter()
            .map(|s| lookup_preset(s))
            .collect::<Result<_, _>>()?
    };
    for regime in [Regime::Periodic, Regime::Chaotic] {
        if chosen.iter().filter(|p| p.system.regime == regime).count() < 2 {
            return Err(invalid(format!(
                "need at least two {} systems",
                regime.as_str()
            )));
        }
    }
    let seeds = seed_range(common.seed, a.seeds)?;
    let entries: Vec<BatteryEntry> = chosen
        .iter()
        .map(|p| BatteryEntry::from_preset(p, sym))
        .collect::<cgnet::Result<_>>()
        .map_err(compute)?;
    let r = battery(&entries, sym, kind, t, &seeds, EXEC).map_err(compute)?;

    let emb = &r.embedding;
    let names = emb.names.clone();
    let m = DissimilarityMatrix::from_rows(&r.bottleneck).map_err(compute)?;
    write_matrix(&mut out, "bottleneck.csv", &names, &m)?;
    write_points(&mut out, &names, Some(&emb.labels), &emb.points)?;
    out.csv("accuracies.csv", |buf| {
        use std::io::Write;
        writeln!(buf, "seed,accuracy")?;
        for (s, acc) in r.seeds.iter().zip(&r.accuracies) {
            writeln!(buf, "{s},{acc}")?;
        }
        Ok(())
    })?;
    out.json("battery.json", &serde_json::to_value(&r).map_err(compute)?);
    if common.plot {
        let positive: Vec<bool> = emb.labels.iter().map(|&l| l == Regime::Chaotic).collect();
        let model = train_svm(
            &emb.points,
            &positive,
            1.0,
            default_gamma(&emb.points),
            seeds[0],
        )
        .ok();
        out.svg(
            "mds.svg",
            plot::mds_scatter(&emb.points, Some(&emb.labels), model.as_ref()),
        )?;
    }
    let skipped: Vec<&String> = r.skipped.iter().map(|(n, _)| n).collect();
    finish(
        out,
        json!({
            "kind": sym.kind().as_str(),
            "distance": kind.as_str(),
            "systems": names.len(),
            "mean_accuracy": r.mean_accuracy,
            "std_accuracy": r.std_accuracy,
            "skipped": skipped,
        }),
    )
}

pub fn write_sweep(out: &mut Outputs, sweep: &SweepResult, timing: bool) -> Result<(), Failure> {
    out.csv("sweep.csv", |buf| sweep.write_csv(buf, timing))
}

fn run_bin_sweep(a: &BinSweepArgs, common: &CommonArgs, mut out: Outputs) -> Outcome {
    let (kind, t) = distance(&a.distance)?;
    if t.is_some() {
        return Err(invalid("bin-sweep uses the default diffusion step count"));
    }
    if !(2 <= a.bins_min && a.bins_min <= a.bins_max && a.bins_max <= 20) {
        return Err(invalid(
            "bin range must satisfy 2 <= --bins-min <= --bins-max <= 20",
        ));
    }
    let source = resolve_input(&a.input)?;
    let plan = plan_embedding(&a.embed, source.preset(), NetworkKind::Coarse)?;
    let series = source.series()?;
    let (tau, dim, _) = plan.resolve(&series)?;
    let bins: Vec<usize> = (a.bins_min..=a.bins_max).collect();
    let r = bin_sweep(&series, tau, dim, &bins, kind, EXEC).map_err(compute)?;
    write_sweep(&mut out, &r, a.timing)?;
    if common.plot {
        out.svg("sweep.svg", plot::sweep_curves(&r, "bins per dimension"))?;
    }
    let s = &r.series[0];
    finish(
        out,
        json!({
            "tau": tau,
            "dimension": dim,
            "bins": bins,
            "entropy": s.entropy,
            "max_lifetime": s.max_lifetime,
        }),
    )
}

fn run_noise_sweep(a: &NoiseSweepArgs, common: &CommonArgs, mut out: Outputs) -> Outcome {
    let periodic = lookup_preset(&a.periodic)?;
    let chaotic = lookup_preset(&a.chaotic)?;
    let sym = symbolizer(&a.network)?;
    let (kind, t) = distance(&a.distance)?;
    if a.snr.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
        return Err(invalid("--snr values must be numbers or inf"));
    }
    let up = a.snr.windows(2).all(|w| w[0] < w[1]);
    let down = a.snr.windows(2).all(|w| w[0] > w[1]);
    if a.snr.is_empty() || !(up || down) {
        return Err(invalid("--snr values must be strictly monotone"));
    }
    let seeds = seed_range(common.seed, a.seeds)?;
    let plan = plan_embedding(&a.embed, Some(&periodic), sym.kind())?;
    let p_ts = Source::Preset(periodic).series()?;
    let c_ts = Source::Preset(chaotic).series()?;
    let (tau, dim, _) = plan.resolve(&p_ts)?;
    let cfg = PipelineConfig {
        tau,
        dimension: dim,
        symbolizer: sym,
        distance: kind,
        diffusion_t: t,
    };
    let r = noise_sweep(&p_ts, &c_ts, &a.snr, &cfg, &seeds, EXEC).map_err(compute)?;
    write_sweep(&mut out, &r.sweep, a.timing)?;
    let body = json!({
        "kind": sym.kind().as_str(),
        "distance": kind.as_str(),
        "tau": tau,
        "dimension": dim,
        "snr_db": a.snr.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "breakdown_snr_db": r.breakdown_snr_db,
    });
    out.json("noise.json", &body);
    if common.plot {
        out.svg("sweep.svg", plot::sweep_curves(&r.sweep, "SNR (dB)"))?;
    }
    finish(out, body)
}
