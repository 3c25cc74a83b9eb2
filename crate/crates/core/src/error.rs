use std::io;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("system `{system}`: {message}")]
    BadParameters { system: String, message: String },

    #[error("integration diverged at t = {time} s")]
    Divergence { time: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("csv row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("signal too short: {len} samples, need more than {required}")]
    SignalTooShort { len: usize, required: usize },

    #[error("degenerate signal: zero range")]
    DegenerateSignal,

    #[error("component {value} outside bin domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("alphabet size overflows u64 (base {base}, dimension {dim})")]
    AlphabetOverflow { base: u64, dim: usize },

    #[error("degenerate sequence: no transitions between distinct states")]
    DegenerateSequence,

    #[error("network is disconnected")]
    Disconnected,

    #[error("entropy undefined at total persistence 1")]
    EntropyUndefined,

    #[error("single-class input: both labels need at least two points")]
    SingleClass,

    #[error("unknown reproduction `{0}`")]
    UnknownReproduction(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
