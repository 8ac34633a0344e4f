//! Learns the edit hypervector `H_E = P · z_E` against a frame-level task.
//!
//! Each frame is classified from `H_input = phi(I) + H_G + P · z_E`. The graph
//! hypervector `H_G`, the node and layer hypervectors and `phi` stay frozen;
//! only `z_E`, `P` and the decision head are updated. Gradients are computed
//! by hand and checked against central finite differences in [`grad_check`].

mod checkpoint;
mod gradcheck;
mod head;
mod loss;

pub use checkpoint::{load_model, load_model_for, save_model, CheckpointError, CHECKPOINT_VERSION};
pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport};
pub use head::{DecisionHead, HeadCache, HeadVariant};
pub use loss::{task_loss, LossParts, StreamPredictions};

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::hdc::{substream, HdcError, Hypervector, ProjectionMap};

/// Stream label of the latent projection `P`.
pub const LATENT_PROJECTION_LABEL: &str = "proj:P";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error(transparent)]
    Hdc(#[from] HdcError),
    #[error("{what}: expected dimension {expected}, found {found}")]
    Dimension { what: &'static str, expected: usize, found: usize },
    #[error("loss became non-finite ({loss}) at epoch {epoch}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("no frames to train on")]
    EmptyData,
    #[error("label {label} is outside 0..{classes}")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("{probs} probability rows for {labels} labels")]
    Misaligned { probs: usize, labels: usize },
    #[error("invalid training config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub lambda: f64,
    pub latent_dim: usize,
    pub seed: u64,
    pub train_projection: bool,
    pub head: HeadVariant,
    /// Attention width (attention head only).
    pub hidden_dim: usize,
    /// Frames visible to each attention query, including itself.
    pub window: usize,
    /// Overrides the class count inferred from the labels.
    pub num_classes: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-5,
            epochs: 30,
            lambda: 0.1,
            latent_dim: 32,
            seed: 42,
            train_projection: true,
            head: HeadVariant::Linear,
            hidden_dim: 32,
            window: 8,
            num_classes: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config(format!("learning rate {} must be finite and >= 0", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be positive".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(TrainError::Config(format!("lambda {} must be finite and >= 0", self.lambda)));
        }
        if self.latent_dim == 0 || self.hidden_dim == 0 || self.window == 0 {
            return Err(TrainError::Config("latent_dim, hidden_dim and window must be positive".into()));
        }
        if self.num_classes == Some(0) {
            return Err(TrainError::Config("num_classes must be positive".into()));
        }
        Ok(())
    }
}

/// Trainable parameters plus the config that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineModel {
    /// `z_E`, length `d`.
    pub edit_latent: Array1<f64>,
    /// `P`, `D x d`.
    pub latent_projection: Array2<f64>,
    pub head: DecisionHead,
    pub config: TrainConfig,
}

/// Per-frame base inputs `phi(I) + H_G`, one `T x D` block per stream.
#[derive(Debug, Clone)]
pub struct Batch {
    pub streams: Vec<StreamBlock>,
    pub frames: usize,
    pub pairs: usize,
}

#[derive(Debug, Clone)]
pub struct StreamBlock {
    pub base: Array2<f64>,
    pub labels: Vec<usize>,
}

/// Gradients laid out like the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub latent: Array1<f64>,
    pub projection: Array2<f64>,
    pub head: DecisionHead,
    /// Sum over all frames of `dL/dH_input`.
    pub input_sum: Array1<f64>,
}

impl Gradients {
    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut out = vec![
            ("edit_latent", self.latent.as_slice().expect("standard layout")),
            ("latent_projection", self.projection.as_slice().expect("standard layout")),
        ];
        out.extend(self.head.tensors());
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: RefineModel,
    /// Loss before each epoch's update.
    pub loss_trace: Vec<f64>,
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut p = logits.clone();
    for mut row in p.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    p
}

fn log_softmax_at(row: ndarray::ArrayView1<f64>, y: usize) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    row[y] - lse
}

impl RefineModel {
    /// Zero latent, Gaussian `P` with `N(0, 1/d)` entries and a freshly
    /// drawn head. `num_classes` is used unless the config overrides it.
    pub fn init(dim: usize, num_classes: usize, cfg: &TrainConfig) -> Result<Self, TrainError> {
        cfg.validate()?;
        if dim == 0 {
            return Err(HdcError::InvalidDimension(0).into());
        }
        let classes = cfg.num_classes.unwrap_or(num_classes);
        if classes == 0 {
            return Err(TrainError::Config("num_classes must be positive".into()));
        }
        let d = cfg.latent_dim;
        let std = (1.0 / d as f64).sqrt();
        let mut rng = substream(cfg.seed, LATENT_PROJECTION_LABEL);
        let latent_projection =
            Array2::from_shape_simple_fn((dim, d), || std * rng.sample::<f64, _>(StandardNormal));
        Ok(Self {
            edit_latent: Array1::zeros(d),
            latent_projection,
            head: DecisionHead::init(cfg.head, dim, classes, cfg.hidden_dim, cfg.window, cfg.seed),
            config: cfg.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.latent_projection.nrows()
    }

    pub fn latent_dim(&self) -> usize {
        self.edit_latent.len()
    }

    pub fn num_classes(&self) -> usize {
        self.head.num_classes()
    }

    /// `H_E = P · z_E`.
    pub fn edit_hv(&self) -> Hypervector {
        Hypervector::from_vec(self.latent_projection.dot(&self.edit_latent).to_vec())
    }

    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut out = vec![
            ("edit_latent", self.edit_latent.as_slice().expect("standard layout")),
            ("latent_projection", self.latent_projection.as_slice().expect("standard layout")),
        ];
        out.extend(self.head.tensors());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let mut out = vec![
            ("edit_latent", self.edit_latent.as_slice_mut().expect("standard layout")),
            ("latent_projection", self.latent_projection.as_slice_mut().expect("standard layout")),
        ];
        out.extend(self.head.tensors_mut());
        out
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    fn check_dims(&self) -> Result<(), TrainError> {
        let (dim, d) = (self.dim(), self.latent_dim());
        if self.latent_projection.ncols() != d {
            return Err(TrainError::Dimension {
                what: "latent projection columns",
                expected: d,
                found: self.latent_projection.ncols(),
            });
        }
        if self.head.input_dim() != dim {
            return Err(TrainError::Dimension {
                what: "decision head input",
                expected: dim,
                found: self.head.input_dim(),
            });
        }
        Ok(())
    }

    /// Class probabilities for the ordered base inputs of one stream.
    pub fn forward_block(&self, base: &Array2<f64>) -> Result<Array2<f64>, TrainError> {
        self.check_dims()?;
        if base.ncols() != self.dim() {
            return Err(TrainError::Dimension {
                what: "frame input",
                expected: self.dim(),
                found: base.ncols(),
            });
        }
        let inputs = base + &self.latent_projection.dot(&self.edit_latent);
        let (logits, _) = self.head.forward(&inputs);
        Ok(softmax_rows(&logits))
    }

    /// Per-frame probabilities for every frame of `data`, in dataset order.
    pub fn predict(&self, graph_hv: &Hypervector, data: &Dataset, pm: &ProjectionMap) -> Result<Vec<Vec<f64>>, TrainError> {
        let batch = prepare_batch(graph_hv, data, pm)?;
        let blocks = batch
            .streams
            .par_iter()
            .map(|s| self.forward_block(&s.base))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(blocks
            .iter()
            .flat_map(|p| p.rows().into_iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .collect())
    }
}

/// Builds `phi(I) + H_G` for every frame, grouped by stream.
pub fn prepare_batch(graph_hv: &Hypervector, data: &Dataset, pm: &ProjectionMap) -> Result<Batch, TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyData);
    }
    let dim = graph_hv.dim();
    if pm.output_dim() != dim {
        return Err(TrainError::Dimension {
            what: "feature projection output",
            expected: dim,
            found: pm.output_dim(),
        });
    }
    let g = ndarray::ArrayView1::from(graph_hv.as_slice());
    let streams = data
        .streams()
        .par_iter()
        .map(|frames| {
            let mut base = Array2::zeros((frames.len(), dim));
            for (mut row, f) in base.rows_mut().into_iter().zip(frames.iter()) {
                let h = pm.project(&f.features)?;
                row.assign(&ndarray::ArrayView1::from(h.as_slice()));
                row += &g;
            }
            Ok(StreamBlock {
                base,
                labels: frames.iter().map(|f| f.label).collect(),
            })
        })
        .collect::<Result<Vec<_>, TrainError>>()?;
    let frames = streams.iter().map(|s| s.labels.len()).sum();
    let pairs = streams.iter().map(|s| s.labels.len().saturating_sub(1)).sum();
    Ok(Batch { streams, frames, pairs })
}

struct StreamGrad {
    ce_sum: f64,
    smooth_sum: f64,
    head: DecisionHead,
    input_sum: Array1<f64>,
}

fn stream_grad(model: &RefineModel, h_e: &Array1<f64>, block: &StreamBlock, batch: &Batch, lambda: f64) -> Result<StreamGrad, TrainError> {
    let classes = model.num_classes();
    if let Some(&label) = block.labels.iter().find(|&&y| y >= classes) {
        return Err(TrainError::LabelOutOfRange { label, classes });
    }
    let inputs = &block.base + h_e;
    let (logits, cache) = model.head.forward(&inputs);
    let p = softmax_rows(&logits);
    let t_len = p.nrows();
    let n = batch.frames as f64;

    let mut ce_sum = 0.0;
    let mut dlogits = p.clone();
    for (t, &y) in block.labels.iter().enumerate() {
        ce_sum -= log_softmax_at(logits.row(t), y);
        dlogits[[t, y]] -= 1.0;
    }
    dlogits /= n;

    let mut smooth_sum = 0.0;
    if batch.pairs > 0 && t_len > 1 {
        let coef = 2.0 * lambda / batch.pairs as f64;
        let mut dp = Array2::<f64>::zeros(p.raw_dim());
        for t in 1..t_len {
            let diff = &p.row(t) - &p.row(t - 1);
            smooth_sum += diff.dot(&diff);
            dp.row_mut(t).scaled_add(coef, &diff);
            dp.row_mut(t - 1).scaled_add(-coef, &diff);
        }
        // Softmax Jacobian: dz = p ⊙ (dp - <p, dp>).
        for t in 0..t_len {
            let inner = p.row(t).dot(&dp.row(t));
            for c in 0..classes {
                dlogits[[t, c]] += p[[t, c]] * (dp[[t, c]] - inner);
            }
        }
    }
    let (head, dx) = model.head.backward(&inputs, &cache, &dlogits);
    Ok(StreamGrad {
        ce_sum,
        smooth_sum,
        head,
        input_sum: dx.sum_axis(Axis(0)),
    })
}

/// Total loss and analytic gradients over the whole batch.
///
/// Streams are processed in parallel and reduced in stream order, so the
/// result does not depend on the thread count.
pub fn loss_and_grad(model: &RefineModel, batch: &Batch) -> Result<(LossParts, Gradients), TrainError> {
    model.check_dims()?;
    if batch.frames == 0 {
        return Err(TrainError::EmptyData);
    }
    let lambda = model.config.lambda;
    let h_e = model.latent_projection.dot(&model.edit_latent);
    let parts = batch
        .streams
        .par_iter()
        .map(|s| stream_grad(model, &h_e, s, batch, lambda))
        .collect::<Result<Vec<_>, _>>()?;
    let mut head = model.head.zeros_like();
    let mut input_sum = Array1::zeros(model.dim());
    let (mut ce_sum, mut smooth_sum) = (0.0, 0.0);
    for s in &parts {
        ce_sum += s.ce_sum;
        smooth_sum += s.smooth_sum;
        head.scaled_add(1.0, &s.head);
        input_sum += &s.input_sum;
    }
    let ce = ce_sum / batch.frames as f64;
    let smooth = if batch.pairs == 0 { 0.0 } else { smooth_sum / batch.pairs as f64 };
    let loss = LossParts {
        total: ce + lambda * smooth,
        ce,
        smooth,
    };
    let latent = model.latent_projection.t().dot(&input_sum);
    let projection = Array2::from_shape_fn(model.latent_projection.raw_dim(), |(i, j)| {
        input_sum[i] * model.edit_latent[j]
    });
    Ok((
        loss,
        Gradients {
            latent,
            projection,
            head,
            input_sum,
        },
    ))
}

/// Loss without gradients.
pub fn evaluate_loss(model: &RefineModel, batch: &Batch) -> Result<LossParts, TrainError> {
    model.check_dims()?;
    if batch.frames == 0 {
        return Err(TrainError::EmptyData);
    }
    let classes = model.num_classes();
    let h_e = model.latent_projection.dot(&model.edit_latent);
    let sums = batch
        .streams
        .par_iter()
        .map(|s| {
            if let Some(&label) = s.labels.iter().find(|&&y| y >= classes) {
                return Err(TrainError::LabelOutOfRange { label, classes });
            }
            let (logits, _) = model.head.forward(&(&s.base + &h_e));
            let p = softmax_rows(&logits);
            let ce: f64 = s.labels.iter().enumerate().map(|(t, &y)| -log_softmax_at(logits.row(t), y)).sum();
            let smooth: f64 = (1..p.nrows())
                .map(|t| {
                    let d = &p.row(t) - &p.row(t - 1);
                    d.dot(&d)
                })
                .sum();
            Ok((ce, smooth))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (ce_sum, smooth_sum) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let ce = ce_sum / batch.frames as f64;
    let smooth = if batch.pairs == 0 { 0.0 } else { smooth_sum / batch.pairs as f64 };
    Ok(LossParts {
        total: ce + model.config.lambda * smooth,
        ce,
        smooth,
    })
}

fn apply_update(model: &mut RefineModel, grads: &Gradients, lr: f64) {
    let train_projection = model.config.train_projection;
    for ((name, param), (_, grad)) in model.tensors_mut().into_iter().zip(grads.tensors()) {
        if name == "latent_projection" && !train_projection {
            continue;
        }
        for (p, g) in param.iter_mut().zip(grad) {
            *p -= lr * g;
        }
    }
}

/// Full-batch gradient descent for `model.config.epochs` epochs.
///
/// `graph_hv` is read only. The returned trace holds the loss evaluated
/// before each epoch's update.
pub fn train(mut model: RefineModel, graph_hv: &Hypervector, data: &Dataset, pm: &ProjectionMap) -> Result<TrainOutcome, TrainError> {
    model.config.validate()?;
    let batch = prepare_batch(graph_hv, data, pm)?;
    let lr = model.config.learning_rate;
    let mut loss_trace = Vec::with_capacity(model.config.epochs);
    for epoch in 0..model.config.epochs {
        let (loss, grads) = loss_and_grad(&model, &batch)?;
        if !loss.total.is_finite() {
            return Err(TrainError::Diverged { epoch, loss: loss.total });
        }
        loss_trace.push(loss.total);
        apply_update(&mut model, &grads, lr);
        if !model.all_finite() {
            return Err(TrainError::Diverged { epoch, loss: f64::NAN });
        }
    }
    Ok(TrainOutcome { model, loss_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FrameSample;

    fn frame(stream: &str, i: u64, features: Vec<f64>, label: usize) -> FrameSample {
        FrameSample {
            stream_id: stream.into(),
            frame_index: i,
            features,
            label,
        }
    }

    #[test]
    fn zero_head_gives_uniform_probabilities() {
        let cfg = TrainConfig { num_classes: Some(4), ..Default::default() };
        let mut m = RefineModel::init(16, 4, &cfg).unwrap();
        m.head = m.head.zeros_like();
        let p = m.forward_block(&Array2::ones((3, 16))).unwrap();
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn edit_hv_starts_at_zero() {
        let m = RefineModel::init(16, 2, &TrainConfig::default()).unwrap();
        assert!(m.edit_hv().is_zero());
        assert_eq!(m.edit_hv().dim(), 16);
    }

    #[test]
    fn evaluate_loss_matches_gradient_pass_and_task_loss() {
        let data = Dataset::new(vec![
            frame("a", 0, vec![1.0, 0.0], 0),
            frame("a", 1, vec![0.0, 1.0], 1),
            frame("a", 2, vec![0.5, 0.5], 1),
            frame("b", 0, vec![-1.0, 0.3], 0),
        ])
        .unwrap();
        let pm = ProjectionMap::phi(24, 2, 3).unwrap();
        let g = Hypervector::from_vec((0..24).map(|i| (i as f64 * 0.37).sin()).collect());
        let mut m = RefineModel::init(24, 2, &TrainConfig { lambda: 0.7, ..Default::default() }).unwrap();
        m.edit_latent.fill(0.3);
        let batch = prepare_batch(&g, &data, &pm).unwrap();
        let (a, _) = loss_and_grad(&m, &batch).unwrap();
        let b = evaluate_loss(&m, &batch).unwrap();
        assert!((a.total - b.total).abs() < 1e-12);
        let probs = m.predict(&g, &data, &pm).unwrap();
        let streams = vec![
            StreamPredictions { probs: probs[..3].to_vec(), labels: vec![0, 1, 1] },
            StreamPredictions { probs: probs[3..].to_vec(), labels: vec![0] },
        ];
        let c = task_loss(&streams, 0.7).unwrap();
        assert!((a.total - c.total).abs() < 1e-12);
        assert!((a.smooth - c.smooth).abs() < 1e-12);
    }

    #[test]
    fn label_beyond_head_is_rejected() {
        let data = Dataset::new(vec![frame("a", 0, vec![1.0], 3)]).unwrap();
        let pm = ProjectionMap::phi(8, 1, 1).unwrap();
        let m = RefineModel::init(8, 2, &TrainConfig::default()).unwrap();
        let err = train(m, &Hypervector::zeros(8), &data, &pm).unwrap_err();
        assert!(matches!(err, TrainError::LabelOutOfRange { label: 3, classes: 2 }));
    }
}
