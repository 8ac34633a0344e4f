//! Edge-contribution scoring and threshold refinement.
//!
//! After the edit hypervector has been trained, every candidate edge
//! `(k, t)` between layer `i` and `i + 1` gets a hypothetical-graph vector
//!
//! ```text
//! FB(i,k,t) = L(i) ⊗ F(k) ⊗ H(k) ⊗ L(i+1) ⊗ B(t) ⊗ H(t)
//! ```
//!
//! built from dense forward (`F`) and backward (`B`) context. Its similarity
//! to the augmented graph vector `H_G'` is softmax-normalized over the layer
//! pair and thresholded to produce the refined edge set.

mod messages;
mod scores;

pub use messages::{dense_messages, DenseMessages};
pub use scores::{EdgeScoreTable, LayerPairScores, ScoreEntry};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::encoder::{assign_hvs, augment, encode_graph, EncodeError, EncodeOptions, HvTables};
use crate::graph::{Edge, LayeredGraph};
use crate::hdc::{HdcError, HvSpace, Hypervector, ProjectionMap};
use crate::trainer::{train, RefineModel, TrainConfig, TrainError};

#[derive(Debug, Error)]
pub enum RefineError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Hdc(#[from] HdcError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("layer {0} has no nodes")]
    EmptyLayer(usize),
    #[error("no message for node {0:?}")]
    MissingMessage(String),
    #[error("refined graph is invalid: {0}")]
    InvalidGraph(String),
    #[error("invalid refinement config: {0}")]
    Config(String),
}

/// How raw similarities become softmax logits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogitScaling {
    /// Softmax directly over `δ(FB, H_G')`.
    Raw,
    /// Softmax over per-layer-pair z-scores of `δ(FB, H_G')`, divided by the
    /// temperature.
    #[default]
    Standardized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreOptions {
    pub scaling: LogitScaling,
    pub temperature: f64,
    /// Use the forward message of the target node instead of its backward
    /// message when building `FB`.
    pub fb_uses_forward_target: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self {
            scaling: LogitScaling::Standardized,
            temperature: 1.0,
            fb_uses_forward_target: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Keep `s > T`.
    Absolute,
    /// Keep `s / max_pair(s) >= T`.
    #[default]
    RelativeMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    pub threshold: f64,
    pub threshold_mode: ThresholdMode,
    pub rounds: usize,
    pub prune_isolated: bool,
    pub keep_top1_per_pair: bool,
    /// Carry the trained model into the next round instead of re-initializing.
    pub warm_start: bool,
    pub scoring: ScoreOptions,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            threshold: 0.2,
            threshold_mode: ThresholdMode::RelativeMax,
            rounds: 1,
            prune_isolated: true,
            keep_top1_per_pair: true,
            warm_start: false,
            scoring: ScoreOptions::default(),
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<(), RefineError> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(RefineError::Config(format!("threshold {} outside (0, 1]", self.threshold)));
        }
        if self.rounds == 0 {
            return Err(RefineError::Config("rounds must be positive".into()));
        }
        if !(self.scoring.temperature > 0.0 && self.scoring.temperature.is_finite()) {
            return Err(RefineError::Config("temperature must be positive".into()));
        }
        Ok(())
    }
}

fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logits.iter_mut() {
        *v /= sum;
    }
}

fn scale_logits(logits: &mut [f64], opts: &ScoreOptions) {
    match opts.scaling {
        LogitScaling::Raw => {}
        LogitScaling::Standardized => {
            let n = logits.len() as f64;
            let mean = logits.iter().sum::<f64>() / n;
            let var = logits.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            let scale = logits.iter().map(|v| v.abs()).fold(0.0, f64::max);
            if std <= 1e-12 * scale || std == 0.0 {
                logits.iter_mut().for_each(|v| *v = 0.0);
            } else {
                logits
                    .iter_mut()
                    .for_each(|v| *v = (*v - mean) / (std * opts.temperature));
            }
        }
    }
}

/// Raw similarities `δ(FB(i,k,t), H_G')` for one layer pair, row-major over
/// `(k, t)`.
fn pair_similarities(
    sources: &[Hypervector],
    targets: &[Hypervector],
    dim: usize,
) -> Vec<f64> {
    sources
        .par_iter()
        .flat_map_iter(|a| {
            targets.iter().map(move |c| {
                let dot: f64 = a.as_slice().iter().zip(c.as_slice()).map(|(x, y)| x * y).sum();
                dot / dim as f64
            })
        })
        .collect()
}

/// Scores every candidate edge of every adjacent layer pair.
pub fn edge_scores(
    g: &LayeredGraph,
    t: &HvTables,
    msgs: &DenseMessages,
    augmented: &Hypervector,
    opts: &ScoreOptions,
) -> Result<EdgeScoreTable, RefineError> {
    t.check_against(g)?;
    let dim = t.dim();
    augmented.expect_dim(dim)?;
    let layers = g.layers();
    let lookup = |map: &std::collections::BTreeMap<String, Hypervector>, id: &str| {
        map.get(id)
            .cloned()
            .ok_or_else(|| RefineError::MissingMessage(id.to_string()))
    };
    let mut layer_pairs = Vec::with_capacity(g.num_layers.saturating_sub(1));
    for i in 1..g.num_layers {
        let (src_layer, dst_layer) = (&layers[i - 1], &layers[i]);
        // Split FB into a source half and a target half folded with H_G'.
        let sources = src_layer
            .iter()
            .map(|n| {
                let mut v = t.layer(i).clone();
                v.bind_assign(&lookup(&msgs.forward, &n.id)?)?;
                v.bind_assign(t.node(&n.id)?)?;
                Ok(v)
            })
            .collect::<Result<Vec<_>, RefineError>>()?;
        let targets = dst_layer
            .iter()
            .map(|n| {
                let ctx = if opts.fb_uses_forward_target { &msgs.forward } else { &msgs.backward };
                let mut v = t.layer(i + 1).clone();
                v.bind_assign(&lookup(ctx, &n.id)?)?;
                v.bind_assign(t.node(&n.id)?)?;
                v.bind_assign(augmented)?;
                Ok(v)
            })
            .collect::<Result<Vec<_>, RefineError>>()?;
        let mut logits = pair_similarities(&sources, &targets, dim);
        if logits.is_empty() {
            layer_pairs.push(LayerPairScores { i, entries: Vec::new() });
            continue;
        }
        scale_logits(&mut logits, opts);
        softmax_in_place(&mut logits);
        let mut entries = Vec::with_capacity(logits.len());
        let mut it = logits.into_iter();
        for src in src_layer {
            for dst in dst_layer {
                entries.push(ScoreEntry {
                    src: src.id.clone(),
                    dst: dst.id.clone(),
                    score: it.next().expect("one logit per candidate"),
                });
            }
        }
        layer_pairs.push(LayerPairScores { i, entries });
    }
    Ok(EdgeScoreTable { layer_pairs })
}

/// Applies the threshold to each layer pair.
///
/// When `keep_top1_per_pair` is set, a pair left empty keeps its best edge
/// (lowest `(src, dst)` among ties). The result is sorted.
pub fn select_edges(scores: &EdgeScoreTable, cfg: &RefineConfig) -> Vec<Edge> {
    let mut out = Vec::new();
    for pair in &scores.layer_pairs {
        let max = pair.max_score();
        let before = out.len();
        for e in &pair.entries {
            let keep = match cfg.threshold_mode {
                ThresholdMode::Absolute => e.score > cfg.threshold,
                ThresholdMode::RelativeMax => max > 0.0 && e.score / max >= cfg.threshold,
            };
            if keep {
                out.push((e.src.clone(), e.dst.clone()));
            }
        }
        if out.len() == before && cfg.keep_top1_per_pair {
            let best = pair
                .entries
                .iter()
                .min_by(|a, b| {
                    b.score
                        .total_cmp(&a.score)
                        .then_with(|| (&a.src, &a.dst).cmp(&(&b.src, &b.dst)))
                });
            if let Some(e) = best {
                out.push((e.src.clone(), e.dst.clone()));
            }
        }
    }
    out.sort();
    out
}

/// Fixed pieces shared by every refinement round.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub space: HvSpace,
    pub phi: ProjectionMap,
    pub encode: EncodeOptions,
    pub train: TrainConfig,
}

impl Pipeline {
    /// Builds the space and feature projection from `train.seed`.
    pub fn new(dim: usize, feature_dim: usize, encode: EncodeOptions, train: TrainConfig) -> Result<Self, HdcError> {
        let space = HvSpace::new(dim, train.seed)?;
        let phi = ProjectionMap::phi(dim, feature_dim, train.seed)?;
        Ok(Self { space, phi, encode, train })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// Everything produced by one train → score → select round.
#[derive(Debug, Clone)]
pub struct RoundOutput {
    pub scores: EdgeScoreTable,
    pub loss_trace: Vec<f64>,
    pub model: RefineModel,
    pub graph_hv: Hypervector,
    pub refined: LayeredGraph,
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub graph: LayeredGraph,
    pub rounds: Vec<RoundOutput>,
}

impl RefineOutcome {
    pub fn score_tables(&self) -> Vec<&EdgeScoreTable> {
        self.rounds.iter().map(|r| &r.scores).collect()
    }
}

/// One refinement round on `g`.
pub fn refine_round(
    g: &LayeredGraph,
    data: &Dataset,
    pipeline: &Pipeline,
    cfg: &RefineConfig,
    init: Option<RefineModel>,
) -> Result<RoundOutput, RefineError> {
    let tables = assign_hvs(g, &pipeline.space, &pipeline.phi)?;
    let encoding = encode_graph(g, &tables, pipeline.encode)?;
    let model = match init {
        Some(m) => m,
        None => RefineModel::init(pipeline.dim(), data.num_classes(), &pipeline.train)?,
    };
    let trained = train(model, &encoding.graph_hv, data, &pipeline.phi)?;
    let augmented = augment(&encoding.graph_hv, &trained.model.edit_hv())?;
    let msgs = dense_messages(g, &tables)?;
    let scores = edge_scores(g, &tables, &msgs, &augmented, &cfg.scoring)?;
    let mut refined = g.with_edges(select_edges(&scores, cfg));
    if cfg.prune_isolated {
        refined = refined.without_isolated_nodes();
    }
    if let Some(i) = refined.layers().iter().position(Vec::is_empty) {
        return Err(RefineError::EmptyLayer(i + 1));
    }
    let report = refined.validate();
    if !report.is_ok() {
        return Err(RefineError::InvalidGraph(report.to_string()));
    }
    Ok(RoundOutput {
        scores,
        loss_trace: trained.loss_trace,
        model: trained.model,
        graph_hv: encoding.graph_hv,
        refined,
    })
}

/// Runs `cfg.rounds` rounds, each consuming the previous round's graph.
pub fn refine(
    g: &LayeredGraph,
    data: &Dataset,
    pipeline: &Pipeline,
    cfg: &RefineConfig,
) -> Result<RefineOutcome, RefineError> {
    cfg.validate()?;
    let mut current = g.clone();
    let mut rounds: Vec<RoundOutput> = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let init = if cfg.warm_start {
            rounds.last().map(|r| r.model.clone())
        } else {
            None
        };
        let round = refine_round(&current, data, pipeline, cfg, init)?;
        current = round.refined.clone();
        rounds.push(round);
    }
    Ok(RefineOutcome { graph: current, rounds })
}
