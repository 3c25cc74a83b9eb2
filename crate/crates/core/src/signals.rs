//! Built-in dynamical systems, CSV ingestion and SNR-calibrated noise.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Dynamic regime label carried by simulated or ingested signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Periodic,
    Chaotic,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Periodic => "periodic",
            Regime::Chaotic => "chaotic",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Regime::Periodic),
            "chaotic" => Ok(Regime::Chaotic),
            other => Err(Error::InvalidInput(format!("unknown regime `{other}`"))),
        }
    }
}

/// Uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate: f64,
    label: Option<String>,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::SignalTooShort {
                len: samples.len(),
                required: 1,
            });
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(TimeSeries {
            samples,
            sample_rate,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A registered vector field plus parameters, initial condition and regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub initial_state: Vec<f64>,
    pub regime: Regime,
}

impl SystemSpec {
    pub fn new(
        name: impl Into<String>,
        parameters: &[(&str, f64)],
        initial_state: Vec<f64>,
        regime: Regime,
    ) -> Self {
        SystemSpec {
            name: name.into(),
            parameters: parameters
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            initial_state,
            regime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Rossler,
    Lorenz,
    DrivenVanDerPol,
    Linear,
}

impl Field {
    fn lookup(name: &str) -> Option<Self> {
        match name {
            "rossler" => Some(Field::Rossler),
            "lorenz" => Some(Field::Lorenz),
            "driven_van_der_pol" => Some(Field::DrivenVanDerPol),
            "linear" => Some(Field::Linear),
            _ => None,
        }
    }

    fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Field::Rossler => &["a", "b", "c"],
            Field::Lorenz => &["sigma", "rho", "beta"],
            Field::DrivenVanDerPol => &["mu", "amplitude", "omega"],
            Field::Linear => &["k"],
        }
    }

    fn state_dim(self) -> usize {
        match self {
            Field::Rossler | Field::Lorenz => 3,
            Field::DrivenVanDerPol => 2,
            Field::Linear => 1,
        }
    }

    fn eval(self, t: f64, s: &[f64], p: &[f64], out: &mut [f64]) {
        match self {
            Field::Rossler => {
                let (a, b, c) = (p[0], p[1], p[2]);
                out[0] = -s[1] - s[2];
                out[1] = s[0] + a * s[1];
                out[2] = b + s[2] * (s[0] - c);
            }
            Field::Lorenz => {
                let (sigma, rho, beta) = (p[0], p[1], p[2]);
                out[0] = sigma * (s[1] - s[0]);
                out[1] = s[0] * (rho - s[2]) - s[1];
                out[2] = s[0] * s[1] - beta * s[2];
            }
            Field::DrivenVanDerPol => {
                let (mu, amp, omega) = (p[0], p[1], p[2]);
                out[0] = s[1];
                out[1] = mu * (1.0 - s[0] * s[0]) * s[1] - s[0] + amp * (omega * t).sin();
            }
            Field::Linear => {
                out[0] = p[0] * s[0];
            }
        }
    }
}

/// Names of the built-in vector fields.
pub fn registered_systems() -> &'static [&'static str] {
    &["rossler", "lorenz", "driven_van_der_pol", "linear"]
}

fn resolve(spec: &SystemSpec) -> Result<(Field, Vec<f64>)> {
    let field = Field::lookup(&spec.name).ok_or_else(|| Error::UnknownSystem(spec.name.clone()))?;
    let names = field.parameter_names();
    let bad = |message: String| Error::BadParameters {
        system: spec.name.clone(),
        message,
    };
    if let Some(extra) = spec
        .parameters
        .keys()
        .find(|k| !names.contains(&k.as_str()))
    {
        return Err(bad(format!("unexpected parameter `{extra}`")));
    }
    let params = names
        .iter()
        .map(|n| {
            spec.parameters
                .get(*n)
                .copied()
                .ok_or_else(|| bad(format!("missing parameter `{n}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if spec.initial_state.len() != field.state_dim() {
        return Err(bad(format!(
            "initial state has {} components, expected {}",
            spec.initial_state.len(),
            field.state_dim()
        )));
    }
    Ok((field, params))
}

/// Classic fixed-step fourth-order Runge-Kutta.
struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    fn step<F: Fn(f64, &[f64], &mut [f64])>(&mut self, f: &F, t: f64, h: f64, y: &mut [f64]) {
        let n = y.len();
        f(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k1[i];
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k2[i];
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        f(t + h, &self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Integrates `spec` with RK4 at step `1 / sample_rate` and returns the
/// first state coordinate, sampled at `t = k / sample_rate` for
/// `k = 0 .. round(duration_s * sample_rate)`, with the leading
/// `discard_fraction` of samples removed.
pub fn simulate(
    spec: &SystemSpec,
    duration_s: f64,
    sample_rate: f64,
    discard_fraction: f64,
) -> Result<TimeSeries> {
    simulate_substeps(spec, duration_s, sample_rate, discard_fraction, 1)
}

/// As [`simulate`], with `substeps` RK4 steps between consecutive samples.
pub fn simulate_substeps(
    spec: &SystemSpec,
    duration_s: f64,
    sample_rate: f64,
    discard_fraction: f64,
    substeps: usize,
) -> Result<TimeSeries> {
    let (field, params) = resolve(spec)?;
    if substeps == 0 {
        return Err(Error::InvalidInput("substeps must be at least 1".into()));
    }
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::InvalidInput(format!(
            "duration must be positive, got {duration_s}"
        )));
    }
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    if !(0.0..1.0).contains(&discard_fraction) {
        return Err(Error::InvalidInput(format!(
            "discard fraction must lie in [0, 1), got {discard_fraction}"
        )));
    }
    let total = (duration_s * sample_rate).round() as usize;
    let h = 1.0 / sample_rate;
    let f = |t: f64, s: &[f64], out: &mut [f64]| field.eval(t, s, &params, out);

    let mut state = spec.initial_state.clone();
    let mut rk = Rk4::new(state.len());
    let mut xs = Vec::with_capacity(total);
    for k in 0..total {
        let t = k as f64 * h;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: t });
        }
        xs.push(state[0]);
        let hs = h / substeps as f64;
        for k in 0..substeps {
            rk.step(&f, t + k as f64 * hs, hs, &mut state);
        }
    }
    let skip = (discard_fraction * total as f64).round() as usize;
    let kept = xs.split_off(skip.min(xs.len()));
    let label = format!("{}-{}", spec.name, spec.regime.as_str());
    Ok(TimeSeries::new(kept, sample_rate)?.with_label(label))
}

/// Simulates many specs, one output per input in input order.
pub fn simulate_batch(
    exec: Execution,
    jobs: &[(SystemSpec, f64, f64, f64)],
) -> Vec<Result<TimeSeries>> {
    par::map_slice(exec, jobs, |(spec, dur, fs, discard)| {
        simulate(spec, *dur, *fs, *discard)
    })
}

/// Integrates a single-coordinate endpoint, used to check the RK4 order.
pub fn rk4_endpoint(spec: &SystemSpec, t_end: f64, steps: usize) -> Result<Vec<f64>> {
    let (field, params) = resolve(spec)?;
    let h = t_end / steps as f64;
    let f = |t: f64, s: &[f64], out: &mut [f64]| field.eval(t, s, &params, out);
    let mut state = spec.initial_state.clone();
    let mut rk = Rk4::new(state.len());
    for k in 0..steps {
        rk.step(&f, k as f64 * h, h, &mut state);
    }
    Ok(state)
}

/// Simulation preset shipped with the crate (see `presets/systems.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub system: SystemSpec,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub discard_fraction: f64,
    pub tau: usize,
    pub ordinal_dim: usize,
    pub coarse_dim: usize,
    /// RK4 steps per sample interval.
    #[serde(default = "one_substep")]
    pub substeps: usize,
}

fn one_substep() -> usize {
    1
}

impl Preset {
    pub fn simulate(&self) -> Result<TimeSeries> {
        Ok(simulate_substeps(
            &self.system,
            self.duration_s,
            self.sample_rate,
            self.discard_fraction,
            self.substeps,
        )?
        .with_label(self.name.clone()))
    }
}

#[derive(Deserialize)]
struct PresetFile {
    presets: Vec<Preset>,
}

const PRESETS_JSON: &str = include_str!("../presets/systems.json");

/// All shipped presets in file order.
pub fn presets() -> Vec<Preset> {
    let file: PresetFile =
        serde_json::from_str(PRESETS_JSON).expect("shipped preset file is valid JSON");
    file.presets
}

pub fn preset(name: &str) -> Result<Preset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownSystem(name.to_string()))
}

/// Reads one numeric column from a header-less CSV file.
pub fn ingest_csv(path: impl AsRef<Path>, sample_rate: f64, column: usize) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let ts = ingest_csv_reader(file, sample_rate, column)?;
    Ok(match path.file_stem().and_then(|s| s.to_str()) {
        Some(stem) => ts.with_label(stem),
        None => ts,
    })
}

pub fn ingest_csv_reader<R: Read>(
    mut reader: R,
    sample_rate: f64,
    column: usize,
) -> Result<TimeSeries> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    // csv skips blank lines and its line counter does not, so rows are
    // recovered from byte offsets
    let line_of = |byte: u64| {
        let bytes = text.as_bytes();
        let mut at = byte as usize;
        while at < bytes.len() && matches!(bytes[at], b'\n' | b'\r') {
            at += 1;
        }
        1 + bytes[..at].iter().filter(|&&b| b == b'\n').count()
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut samples = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            row: e.position().map_or(i + 1, |p| line_of(p.byte())),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(i + 1, |p| line_of(p.byte()));
        let cell = record.get(column).ok_or_else(|| Error::Csv {
            row,
            message: format!("missing column {column}"),
        })?;
        if cell.is_empty() {
            return Err(Error::Csv {
                row,
                message: "empty cell".into(),
            });
        }
        let value: f64 = cell.parse().map_err(|_| Error::Csv {
            row,
            message: format!("cannot parse `{cell}` as a number"),
        })?;
        if !value.is_finite() {
            return Err(Error::Csv {
                row,
                message: format!("non-finite value `{cell}`"),
            });
        }
        samples.push(value);
    }
    if samples.len() < 2 {
        return Err(Error::SignalTooShort {
            len: samples.len(),
            required: 1,
        });
    }
    TimeSeries::new(samples, sample_rate)
}

pub fn rms(ts: &TimeSeries) -> f64 {
    rms_of(ts.samples())
}

pub(crate) fn rms_of(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Adds zero-mean Gaussian noise whose realized RMS gives exactly `snr_db`.
///
/// `f64::INFINITY` means no noise and returns the input unchanged.
pub fn add_noise_snr(ts: &TimeSeries, snr_db: f64, seed: u64) -> Result<TimeSeries> {
    if snr_db == f64::INFINITY {
        return Ok(ts.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidInput(format!(
            "SNR must be finite or +inf, got {snr_db}"
        )));
    }
    let signal_rms = rms(ts);
    if signal_rms == 0.0 {
        return Err(Error::InvalidInput(
            "cannot set SNR on a zero-RMS signal".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..ts.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let noise_rms = rms_of(&noise);
    let target = signal_rms / 10f64.powf(snr_db / 20.0);
    let scale = target / noise_rms;
    let samples = ts
        .samples()
        .iter()
        .zip(&noise)
        .map(|(x, n)| x + scale * n)
        .collect();
    let mut out = TimeSeries::new(samples, ts.sample_rate())?;
    out.label = ts.label.clone();
    Ok(out)
}
