use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cgnet",
    version,
    about = "Transitional networks and persistent homology for periodic/chaotic state detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Directory that receives the artifacts
    #[arg(long, global = true, env = "CGNET_OUT", default_value = "cgnet-out")]
    pub out: PathBuf,

    /// Base seed for noise and SVM scan order
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Also write SVG figures
    #[arg(long, global = true)]
    pub plot: bool,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "CGNET_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a bundled system preset and write the sampled series
    Simulate {
        #[arg(long)]
        system: String,
    },
    /// Delay-embed a series
    Embed(PipelineArgs),
    /// Build the transitional network and write its edge list
    Network(PipelineArgs),
    /// Compute persistence diagrams of the network distance matrix
    Persist(PersistArgs),
    /// Normalized persistent entropy of a diagram
    Entropy(EntropyArgs),
    /// Bottleneck distances between diagram files
    Bottleneck(DiagramFiles),
    /// Classical MDS of diagram files under the bottleneck distance
    Mds(DiagramFiles),
    /// Full pipeline over bundled presets, MDS and SVM separation accuracy
    Battery(BatteryArgs),
    /// Entropy and max lifetime of a coarse-grained network against bin count
    BinSweep(BinSweepArgs),
    /// Entropy of periodic and chaotic series against added noise level
    NoiseSweep(NoiseSweepArgs),
    /// Run a bundled reproduction and check its expected outcome
    Repro {
        /// One of: fig4-toy, sine-method-example, rossler-entropy,
        /// appendixA-binsweep, rossler-noise
        name: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Embed(_) => "embed",
            Command::Network(_) => "network",
            Command::Persist(_) => "persist",
            Command::Entropy(_) => "entropy",
            Command::Bottleneck(_) => "bottleneck",
            Command::Mds(_) => "mds",
            Command::Battery(_) => "battery",
            Command::BinSweep(_) => "bin-sweep",
            Command::NoiseSweep(_) => "noise-sweep",
            Command::Repro { .. } => "repro",
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Bundled system preset
    #[arg(long, conflicts_with = "csv")]
    pub system: Option<String>,

    /// CSV file with one sample per row
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// Sample rate of the CSV input in Hz
    #[arg(long, requires = "csv")]
    pub fs: Option<f64>,

    /// Zero-based CSV column to read
    #[arg(long, default_value_t = 0, requires = "csv")]
    pub column: usize,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Embedding delay in samples
    #[arg(long, conflicts_with = "auto_tau")]
    pub tau: Option<usize>,

    /// Embedding dimension
    #[arg(long, conflicts_with = "auto_dim")]
    pub dim: Option<usize>,

    /// Pick the delay from the permutation entropy curve
    #[arg(long)]
    pub auto_tau: bool,

    /// Pick the dimension by false nearest neighbours
    #[arg(long)]
    pub auto_dim: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Ordinal,
    Coarse,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Symbolization: ordinal partitions or coarse-grained state space
    #[arg(long, value_enum, default_value_t = KindArg::Coarse)]
    pub kind: KindArg,

    /// Bins per dimension (coarse kind only; default 12)
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Unweighted,
    ShortestWeighted,
    WeightedShortest,
    Diffusion,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// Node distance used for the filtration
    #[arg(long, value_enum, default_value_t = DistanceArg::Unweighted)]
    pub distance: DistanceArg,

    /// Random-walk steps for the diffusion distance (default ceil(log2 N) + 1)
    #[arg(long)]
    pub diffusion_t: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
}

#[derive(Debug, Args)]
pub struct PersistArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    /// log2 of the total persistence
    Total,
    /// log2 of the number of pairs
    Pairs,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Diagram JSON written by `persist`
    #[arg(long)]
    pub diagram: PathBuf,

    /// Homology dimension to summarize
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub homology: u8,

    #[arg(long, value_enum, default_value_t = NormalizationArg::Total)]
    pub normalization: NormalizationArg,
}

#[derive(Debug, Args)]
pub struct DiagramFiles {
    /// Diagram JSON files written by `persist`
    #[arg(long = "diagram", required = true, num_args = 1..)]
    pub diagrams: Vec<PathBuf>,

    /// Homology dimension compared
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub homology: u8,
}

#[derive(Debug, Args)]
pub struct BatteryArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,

    /// Presets to include (default: all)
    #[arg(long, value_delimiter = ',')]
    pub systems: Vec<String>,

    /// Number of SVM seeds, run as seed .. seed + count - 1
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
}

#[derive(Debug, Args)]
pub struct BinSweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,

    #[arg(long, default_value_t = 2)]
    pub bins_min: usize,

    #[arg(long, default_value_t = 20)]
    pub bins_max: usize,

    /// Add a per-point compute time column
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct NoiseSweepArgs {
    /// Periodic preset
    #[arg(long, default_value = "rossler-periodic")]
    pub periodic: String,

    /// Chaotic preset
    #[arg(long, default_value = "rossler-chaotic")]
    pub chaotic: String,

    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,

    /// SNR levels in dB, strictly monotone; `inf` means no noise
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "40,35,32,29,27,25,23,21,19,17,15"
    )]
    pub snr: Vec<f64>,

    /// Noise realizations per SNR level
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,

    /// Add a per-point compute time column
    #[arg(long)]
    pub timing: bool,
}
