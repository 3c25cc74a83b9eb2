//! Bundled reproductions. Each writes its figure data, then checks the
//! expected outcome; a miss exits with code 3 after the data is written.

use cgnet::analysis::{bin_sweep, noise_sweep, run_pipeline, PipelineConfig};
use cgnet::graphdist::DistanceKind;
use cgnet::homology::{compute_diagrams, toy_example};
use cgnet::networks::Symbolizer;
use cgnet::par::Execution;
use cgnet::signals::TimeSeries;
use serde_json::{json, Value};

use crate::args::CommonArgs;
use crate::commands::{
    diagram_summary, finish, lookup_preset, seed_range, write_series, write_sweep, Outcome, Outputs,
};
use crate::{compute, invalid, plot, Failure};

const EXEC: Execution = Execution::Parallel;

pub const NAMES: [&str; 5] = [
    "fig4-toy",
    "sine-method-example",
    "rossler-entropy",
    "appendixA-binsweep",
    "rossler-noise",
];

struct Checks(Vec<Value>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn add(&mut self, id: &str, pass: bool, detail: Value) {
        self.0
            .push(json!({ "id": id, "pass": pass, "detail": detail }));
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|c| c["pass"] == true)
    }
}

/// Writes the artifacts, then reports the checks.
fn conclude(out: Outputs, mut summary: Value, checks: Checks) -> Outcome {
    let passed = checks.passed();
    summary["checks"] = Value::Array(checks.0);
    let summary = finish(out, summary)?;
    if passed {
        Ok(summary)
    } else {
        Err(Failure::Check(summary))
    }
}

fn rossler_cfg(symbolizer: Symbolizer, dimension: usize) -> PipelineConfig {
    PipelineConfig {
        tau: 43,
        dimension,
        symbolizer,
        distance: DistanceKind::UnweightedShortest,
        diffusion_t: None,
    }
}

pub fn run(name: &str, common: &CommonArgs, out: Outputs) -> Outcome {
    match name {
        "fig4-toy" => toy(out),
        "sine-method-example" => sine(out),
        "rossler-entropy" => rossler_entropy(out),
        "appendixA-binsweep" => binsweep(common, out),
        "rossler-noise" => rossler_noise(common, out),
        _ => Err(invalid(format!(
            "unknown reproduction `{name}`; known: {}",
            NAMES.join(", ")
        ))),
    }
}

fn toy(mut out: Outputs) -> Outcome {
    let toy = toy_example();
    let d = toy.dissimilarity().map_err(compute)?;
    let dgm = compute_diagrams(&d).map_err(compute)?;
    out.csv("distance.csv", |buf| d.write_csv(buf))?;
    out.json("diagram.json", &dgm.to_json());
    let deaths: Vec<f64> = dgm.dim0.iter().map(|p| p.1).collect();
    let mut checks = Checks::new();
    checks.add("dim0", deaths == toy.expected.dim0_deaths, json!(deaths));
    checks.add("dim1", dgm.dim1 == toy.expected.dim1, json!(dgm.dim1));
    conclude(out, json!({ "name": "fig4-toy" }), checks)
}

fn sine(mut out: Outputs) -> Outcome {
    let fs = 50.0;
    let xs = (0..150)
        .map(|i| (std::f64::consts::PI * i as f64 / fs).sin())
        .collect();
    let ts = TimeSeries::new(xs, fs).map_err(compute)?;
    let cfg = PipelineConfig {
        tau: 26,
        dimension: 2,
        symbolizer: Symbolizer::Coarse { bins: 10 },
        distance: DistanceKind::UnweightedShortest,
        diffusion_t: None,
    };
    let r = run_pipeline(&ts, &cfg, EXEC).map_err(compute)?;
    out.csv("series.csv", |buf| write_series(buf, &ts))?;
    out.csv("edges.csv", |buf| r.network.write_edge_list(buf))?;
    out.json("diagram.json", &r.diagram.to_json());
    let d1 = &r.diagram.dim1;
    let mut checks = Checks::new();
    checks.add(
        "single-loop",
        d1.len() == 1 && d1[0].0 == 1.0 && (10.0..=14.0).contains(&d1[0].1),
        json!(d1),
    );
    conclude(
        out,
        json!({ "name": "sine-method-example", "nodes": r.network.node_count() }),
        checks,
    )
}

fn rossler_entropy(mut out: Outputs) -> Outcome {
    let periodic = lookup_preset("rossler-periodic")?
        .simulate()
        .map_err(compute)?;
    let chaotic = lookup_preset("rossler-chaotic")?
        .simulate()
        .map_err(compute)?;
    let mut rows = Vec::new();
    let mut checks = Checks::new();
    let cases = [
        (
            "coarse",
            Symbolizer::Coarse { bins: 12 },
            4,
            [("periodic", 0.0, 0.10), ("chaotic", 0.70, 1.0)],
        ),
        (
            "ordinal",
            Symbolizer::Ordinal,
            7,
            [("periodic", 0.30, 0.70), ("chaotic", 0.75, 1.0)],
        ),
    ];
    for (kind, sym, dim, bounds) in cases {
        for ((regime, lo, hi), ts) in bounds.into_iter().zip([&periodic, &chaotic]) {
            let r = run_pipeline(ts, &rossler_cfg(sym, dim), EXEC).map_err(compute)?;
            let summary = diagram_summary(&r.diagram);
            let e = summary["entropy"].as_f64().unwrap_or(f64::NAN);
            out.json(
                &format!("diagram_{kind}_{regime}.json"),
                &r.diagram.to_json(),
            );
            checks.add(
                &format!("{kind}-{regime}"),
                lo <= e && e <= hi,
                json!({ "entropy": e, "range": [lo, hi] }),
            );
            rows.push(json!({ "kind": kind, "regime": regime, "summary": summary }));
        }
    }
    out.json("entropy.json", &Value::Array(rows));
    conclude(out, json!({ "name": "rossler-entropy" }), checks)
}

fn binsweep(common: &CommonArgs, mut out: Outputs) -> Outcome {
    let ts = lookup_preset("rossler-periodic")?
        .simulate()
        .map_err(compute)?;
    let bins: Vec<usize> = (2..=20).collect();
    let r =
        bin_sweep(&ts, 43, 4, &bins, DistanceKind::UnweightedShortest, EXEC).map_err(compute)?;
    write_sweep(&mut out, &r, false)?;
    if common.plot {
        out.svg("sweep.svg", plot::sweep_curves(&r, "bins per dimension"))?;
    }
    let e = &r.series[0].entropy;
    let star =
        (1..bins.len()).find(|&k| (10..=13).contains(&bins[k]) && e[k] < 0.1 && e[k - 1] >= 0.1);
    let mut checks = Checks::new();
    checks.add(
        "drop",
        star.is_some(),
        json!({ "bins": star.map(|k| bins[k]) }),
    );
    conclude(
        out,
        json!({ "name": "appendixA-binsweep", "entropy": e }),
        checks,
    )
}

fn rossler_noise(common: &CommonArgs, mut out: Outputs) -> Outcome {
    let periodic = lookup_preset("rossler-periodic")?
        .simulate()
        .map_err(compute)?;
    let chaotic = lookup_preset("rossler-chaotic")?
        .simulate()
        .map_err(compute)?;
    let seeds = seed_range(common.seed, 5)?;
    let snr = [
        40.0, 35.0, 32.0, 29.0, 27.0, 25.0, 23.0, 21.0, 19.0, 17.0, 15.0,
    ];
    let mut breakdown = Vec::new();
    for (kind, sym, dim) in [
        ("coarse", Symbolizer::Coarse { bins: 12 }, 4),
        ("ordinal", Symbolizer::Ordinal, 7),
    ] {
        let r = noise_sweep(
            &periodic,
            &chaotic,
            &snr,
            &rossler_cfg(sym, dim),
            &seeds,
            EXEC,
        )
        .map_err(compute)?;
        out.csv(&format!("sweep_{kind}.csv"), |buf| {
            r.sweep.write_csv(buf, false)
        })?;
        if common.plot {
            out.svg(
                &format!("sweep_{kind}.svg"),
                plot::sweep_curves(&r.sweep, "SNR (dB)"),
            )?;
        }
        breakdown.push(r.breakdown_snr_db);
    }
    // no separation even at the cleanest level counts as +inf
    let c = breakdown[0].unwrap_or(f64::INFINITY);
    let o = breakdown[1].unwrap_or(f64::INFINITY);
    let mut checks = Checks::new();
    checks.add("coarse-breakdown", c <= 27.0, json!(breakdown[0]));
    checks.add("ordinal-breakdown", o >= 28.0, json!(breakdown[1]));
    checks.add(
        "ordering",
        c < o,
        json!({ "coarse": breakdown[0], "ordinal": breakdown[1] }),
    );
    let body = json!({ "name": "rossler-noise", "breakdown_snr_db": { "coarse": breakdown[0], "ordinal": breakdown[1] } });
    out.json("noise.json", &body);
    conclude(out, body, checks)
}
