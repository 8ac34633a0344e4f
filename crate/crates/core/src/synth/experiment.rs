use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{edge_prf, evaluate_recovery, generate, PlantedTask, PlantedTaskConfig, RecoveryReport, SynthError};
use crate::encoder::{assign_hvs, encode_graph, EncodeOptions};
use crate::graph::{emit_dot, Edge, LayeredGraph};
use crate::hdc::{substream, DEFAULT_DIM};
use crate::refiner::{refine, EdgeScoreTable, Pipeline, RefineConfig};
use crate::trainer::{train, RefineModel, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub task: PlantedTaskConfig,
    pub refine: RefineConfig,
    pub train: TrainConfig,
    pub encode: EncodeOptions,
    pub dim: usize,
    /// Monte-Carlo draws of the random-selection baseline.
    pub baseline_draws: usize,
    /// Retrain a model on the refined graph and report frame-level AUCs.
    pub evaluate_auc: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: PlantedTaskConfig::default(),
            refine: RefineConfig::default(),
            train: TrainConfig::default(),
            encode: EncodeOptions::default(),
            dim: DEFAULT_DIM,
            baseline_draws: 100,
            evaluate_auc: true,
        }
    }
}

impl ExperimentConfig {
    /// Default configuration with the task and training seeds both set.
    pub fn seeded(seed: u64) -> Self {
        let mut cfg = Self::default();
        cfg.task.seed = seed;
        cfg.train.seed = seed;
        cfg
    }
}

/// Equal-budget random edge selection from the candidate pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineStats {
    pub budget: usize,
    pub draws: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
}

/// Mean precision, recall and F1 of `draws` uniform `budget`-subsets of
/// `pool`.
pub fn random_baseline(pool: &[Edge], truth: &BTreeSet<Edge>, budget: usize, draws: usize, seed: u64) -> BaselineStats {
    let budget = budget.min(pool.len());
    let mut rng = substream(seed, "synth:baseline");
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for _ in 0..draws {
        let chosen: BTreeSet<Edge> = sample(&mut rng, pool.len(), budget)
            .into_iter()
            .map(|i| pool[i].clone())
            .collect();
        let (a, b, c) = edge_prf(&chosen, truth);
        p += a;
        r += b;
        f += c;
    }
    let n = draws.max(1) as f64;
    BaselineStats {
        budget,
        draws,
        mean_precision: p / n,
        mean_recall: r / n,
        mean_f1: f / n,
    }
}

/// Two-sided sign-flip permutation test of `mean(diffs) = 0`.
///
/// Enumerates all sign patterns for up to 20 values and otherwise draws
/// `100_000` random patterns.
pub fn sign_flip_p_value(diffs: &[f64], seed: u64) -> f64 {
    let n = diffs.len();
    if n == 0 {
        return 1.0;
    }
    let observed = diffs.iter().sum::<f64>().abs();
    let tol = 1e-12 * diffs.iter().map(|d| d.abs()).sum::<f64>().max(1e-300);
    let stat = |mask: u64| -> f64 {
        diffs
            .iter()
            .enumerate()
            .map(|(i, d)| if mask >> i & 1 == 1 { -d } else { *d })
            .sum::<f64>()
            .abs()
    };
    if n <= 20 {
        let total = 1u64 << n;
        let extreme = (0..total).filter(|&m| stat(m) >= observed - tol).count();
        return extreme as f64 / total as f64;
    }
    let mut rng = substream(seed, "synth:signflip");
    let draws = 100_000;
    let mut extreme = 1;
    for _ in 0..draws {
        let s: f64 = diffs
            .iter()
            .map(|d| if rng.random::<bool>() { -d } else { *d })
            .sum::<f64>()
            .abs();
        if s >= observed - tol {
            extreme += 1;
        }
    }
    extreme as f64 / (draws + 1) as f64
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub task: PlantedTask,
    pub report: RecoveryReport,
    pub baseline: BaselineStats,
    /// Round 0 is the generated graph; round `k` is the output of round `k`.
    pub snapshots: Vec<LayeredGraph>,
    pub dots: Vec<String>,
    /// Score table of each round.
    pub score_tables: Vec<EdgeScoreTable>,
    pub loss_traces: Vec<Vec<f64>>,
    /// Loss trace of the evaluation model trained on the refined graph.
    pub eval_loss_trace: Vec<f64>,
}

/// Generates a planted task, refines its graph and scores the recovery.
///
/// Planted/spurious score means come from the first round's table, which
/// covers every original edge.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, SynthError> {
    let task = generate(&cfg.task)?;
    let data = task.dataset();
    let pipeline = Pipeline::new(cfg.dim, task.graph.feature_dim, cfg.encode, cfg.train.clone())?;
    let outcome = refine(&task.graph, data, &pipeline, &cfg.refine)?;

    let mut snapshots = vec![task.graph.clone()];
    let mut dots = vec![emit_dot(&task.graph, None)];
    for r in &outcome.rounds {
        snapshots.push(r.refined.clone());
        dots.push(emit_dot(&r.refined, Some(&r.scores)));
    }
    let score_tables: Vec<EdgeScoreTable> = outcome.rounds.iter().map(|r| r.scores.clone()).collect();
    let loss_traces = outcome.rounds.iter().map(|r| r.loss_trace.clone()).collect();

    let mut eval_loss_trace = Vec::new();
    let probs = if cfg.evaluate_auc {
        let tables = assign_hvs(&outcome.graph, &pipeline.space, &pipeline.phi).map_err(crate::refiner::RefineError::from)?;
        let enc = encode_graph(&outcome.graph, &tables, cfg.encode).map_err(crate::refiner::RefineError::from)?;
        let model = RefineModel::init(pipeline.dim(), data.num_classes(), &cfg.train).map_err(crate::refiner::RefineError::from)?;
        let trained = train(model, &enc.graph_hv, data, &pipeline.phi).map_err(crate::refiner::RefineError::from)?;
        eval_loss_trace = trained.loss_trace;
        Some(
            trained
                .model
                .predict(&enc.graph_hv, data, &pipeline.phi)
                .map_err(crate::refiner::RefineError::from)?,
        )
    } else {
        None
    };
    let report = evaluate_recovery(&outcome.graph, &score_tables[0], &task, probs.as_deref())?;
    let pool = task.graph.candidate_edges();
    let baseline = random_baseline(
        &pool,
        &task.planted_edges,
        report.refined_edges,
        cfg.baseline_draws,
        cfg.task.seed,
    );
    Ok(ExperimentResult {
        task,
        report,
        baseline,
        snapshots,
        dots,
        score_tables,
        loss_traces,
        eval_loss_trace,
    })
}

/// Everything needed to compare one seed against the random baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub report: RecoveryReport,
    pub baseline: BaselineStats,
}

impl From<(u64, &ExperimentResult)> for SeedSummary {
    fn from((seed, r): (u64, &ExperimentResult)) -> Self {
        Self {
            seed,
            report: r.report.clone(),
            baseline: r.baseline.clone(),
        }
    }
}
