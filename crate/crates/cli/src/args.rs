use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Hyperdimensional encoding and data-driven refinement of layered reasoning graphs.
///
/// Settings are resolved as: command-line flag, then the `--config` file,
/// then (for the seed only) the HDGR_SEED environment variable, then the
/// built-in default. Failures print one JSON line `{"error": {...}}` to
/// stderr and exit with 1 (usage), 2 (input) or 3 (numeric failure).
#[derive(Debug, Parser)]
#[command(name = "hdgr", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a graph into its graph hypervector; writes encoding.json.
    Encode,
    /// Train the edit hypervector and decision head; writes model.json and loss.json.
    Train,
    /// Refine a graph against a dataset; writes per-round graphs, scores and DOT snapshots.
    Refine,
    /// Generate a planted synthetic task, refine it and score the recovery.
    Synth,
    /// Score a refined graph against a planted task; writes report.json.
    Eval,
    /// Export a graph as Graphviz DOT, optionally labelled with edge scores.
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdModeArg {
    /// Keep edges whose score exceeds the threshold.
    Absolute,
    /// Keep edges whose score divided by the layer-pair maximum reaches the threshold.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeadArg {
    Linear,
    Attention1,
}

#[derive(Debug, Default, Args)]
pub struct Common {
    /// JSON config file; its keys mirror the long flag names with underscores.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Input graph (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub graph: Option<PathBuf>,

    /// Frame dataset (JSON lines).
    #[arg(long, global = true, value_name = "FILE")]
    pub data: Option<PathBuf>,

    /// Model checkpoint, read by `eval` to compute class AUCs.
    #[arg(long, global = true, value_name = "FILE")]
    pub model: Option<PathBuf>,

    /// Edge score table (JSON) for `dot` labels and `eval` score means.
    #[arg(long, global = true, value_name = "FILE")]
    pub scores: Option<PathBuf>,

    /// Planted task file written by `synth`, used by `eval`.
    #[arg(long, global = true, value_name = "FILE")]
    pub task: Option<PathBuf>,

    /// Output directory (created if missing); for `dot`, the output file, stdout if omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Hypervector dimension D [default: 10000].
    #[arg(long, global = true)]
    pub dim: Option<usize>,

    /// Edit latent dimension d [default: 32].
    #[arg(long, global = true)]
    pub latent_dim: Option<usize>,

    /// Learning rate [default: 1e-5].
    #[arg(long, global = true)]
    pub lr: Option<f64>,

    /// Training epochs [default: 30].
    #[arg(long, global = true)]
    pub epochs: Option<usize>,

    /// Weight of the temporal smoothness term [default: 0.1].
    #[arg(long, global = true)]
    pub lambda: Option<f64>,

    /// Edge selection threshold in (0, 1] [default: 0.2].
    #[arg(long, global = true)]
    pub threshold: Option<f64>,

    /// How the threshold is applied [default: relative].
    #[arg(long, global = true, value_enum)]
    pub threshold_mode: Option<ThresholdModeArg>,

    /// Refinement rounds [default: 1].
    #[arg(long, global = true)]
    pub rounds: Option<usize>,

    /// Master seed for every random draw [default: HDGR_SEED, else 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Decision head [default: linear].
    #[arg(long, global = true, value_enum)]
    pub head: Option<HeadArg>,

    /// Planted signal strength for `synth` [default: 1.0].
    #[arg(long, global = true)]
    pub signal: Option<f64>,

    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Include per-node path memories in encoding.json.
    #[arg(long, global = true)]
    pub with_memories: bool,
}
