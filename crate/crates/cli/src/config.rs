use std::path::{Path, PathBuf};

use hdgr::encoder::EncodeOptions;
use hdgr::refiner::{RefineConfig, ScoreOptions, ThresholdMode};
use hdgr::synth::PlantedTaskConfig;
use hdgr::trainer::{HeadVariant, TrainConfig};
use serde::Deserialize;

use crate::args::{Common, HeadArg, ThresholdModeArg};
use crate::error::CliError;

pub const SEED_ENV: &str = "HDGR_SEED";
pub const DEFAULT_DIM: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BASELINE_DRAWS: usize = 100;

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub graph: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub task: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub dim: Option<usize>,
    pub latent_dim: Option<usize>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub lambda: Option<f64>,
    pub threshold: Option<f64>,
    pub threshold_mode: Option<ThresholdMode>,
    pub rounds: Option<usize>,
    pub seed: Option<u64>,
    pub head: Option<HeadVariant>,
    pub signal: Option<f64>,
    pub threads: Option<usize>,
    pub with_memories: Option<bool>,
    pub hidden_dim: Option<usize>,
    pub window: Option<usize>,
    pub train_projection: Option<bool>,
    pub keep_top1_per_pair: Option<bool>,
    pub prune_isolated: Option<bool>,
    pub warm_start: Option<bool>,
    pub baseline_draws: Option<usize>,
    pub encode: Option<EncodeOptions>,
    pub scoring: Option<ScoreOptions>,
    pub synth_task: Option<PlantedTaskConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = crate::io::read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub graph: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub task: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub dim: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub with_memories: bool,
    pub baseline_draws: usize,
    pub encode: EncodeOptions,
    pub train: TrainConfig,
    pub refine: RefineConfig,
    pub synth_task: PlantedTaskConfig,
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

impl Settings {
    pub fn resolve(flags: &Common) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let seed = match flags.seed.or(file.seed) {
            Some(s) => s,
            None => env_seed()?.unwrap_or(DEFAULT_SEED),
        };

        let td = TrainConfig::default();
        let train = TrainConfig {
            learning_rate: flags.lr.or(file.lr).unwrap_or(td.learning_rate),
            epochs: flags.epochs.or(file.epochs).unwrap_or(td.epochs),
            lambda: flags.lambda.or(file.lambda).unwrap_or(td.lambda),
            latent_dim: flags.latent_dim.or(file.latent_dim).unwrap_or(td.latent_dim),
            seed,
            train_projection: file.train_projection.unwrap_or(td.train_projection),
            head: flags
                .head
                .map(|h| match h {
                    HeadArg::Linear => HeadVariant::Linear,
                    HeadArg::Attention1 => HeadVariant::Attention1,
                })
                .or(file.head)
                .unwrap_or(td.head),
            hidden_dim: file.hidden_dim.unwrap_or(td.hidden_dim),
            window: file.window.unwrap_or(td.window),
            num_classes: None,
        };

        let rd = RefineConfig::default();
        let refine = RefineConfig {
            threshold: flags.threshold.or(file.threshold).unwrap_or(rd.threshold),
            threshold_mode: flags
                .threshold_mode
                .map(|m| match m {
                    ThresholdModeArg::Absolute => ThresholdMode::Absolute,
                    ThresholdModeArg::Relative => ThresholdMode::RelativeMax,
                })
                .or(file.threshold_mode)
                .unwrap_or(rd.threshold_mode),
            rounds: flags.rounds.or(file.rounds).unwrap_or(rd.rounds),
            prune_isolated: file.prune_isolated.unwrap_or(rd.prune_isolated),
            keep_top1_per_pair: file.keep_top1_per_pair.unwrap_or(rd.keep_top1_per_pair),
            warm_start: file.warm_start.unwrap_or(rd.warm_start),
            scoring: file.scoring.unwrap_or(rd.scoring),
        };

        let mut synth_task = file.synth_task.unwrap_or_default();
        synth_task.seed = seed;
        if let Some(s) = flags.signal.or(file.signal) {
            synth_task.signal_strength = s;
        }

        let settings = Self {
            graph: flags.graph.clone().or(file.graph),
            data: flags.data.clone().or(file.data),
            model: flags.model.clone().or(file.model),
            scores: flags.scores.clone().or(file.scores),
            task: flags.task.clone().or(file.task),
            out: flags.out.clone().or(file.out),
            dim: flags.dim.or(file.dim).unwrap_or(DEFAULT_DIM),
            seed,
            threads: flags.threads.or(file.threads),
            with_memories: flags.with_memories || file.with_memories.unwrap_or(false),
            baseline_draws: file.baseline_draws.unwrap_or(DEFAULT_BASELINE_DRAWS),
            encode: file.encode.unwrap_or_default(),
            train,
            refine,
            synth_task,
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.dim == 0 {
            return Err(CliError::usage("dim must be positive"));
        }
        if self.threads == Some(0) {
            return Err(CliError::usage("threads must be positive"));
        }
        if self.baseline_draws == 0 {
            return Err(CliError::usage("baseline_draws must be positive"));
        }
        if !(self.synth_task.signal_strength.is_finite() && self.synth_task.noise_std >= 0.0) {
            return Err(CliError::usage("signal must be finite and noise_std non-negative"));
        }
        self.train.validate().map_err(|e| CliError::usage(e.to_string()))?;
        self.refine.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

pub fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or_else(|| CliError::usage(format!("--{flag} is required")))
}
