use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::hdc::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadVariant {
    #[default]
    Linear,
    /// One single-head causal self-attention layer over a window of frames,
    /// followed by a linear classifier.
    Attention1,
}

/// Maps per-frame input hypervectors to class logits.
#[derive(Debug, Clone, PartialEq)]
pub enum DecisionHead {
    Linear {
        /// `C x D`
        weight: Array2<f64>,
        bias: Array1<f64>,
    },
    Attention {
        /// `h x D` each.
        query: Array2<f64>,
        key: Array2<f64>,
        value: Array2<f64>,
        /// `C x h`
        output: Array2<f64>,
        output_bias: Array1<f64>,
        window: usize,
    },
}

fn gaussian(rows: usize, cols: usize, std: f64, seed: u64, label: &str) -> Array2<f64> {
    let mut rng = substream(seed, label);
    Array2::from_shape_simple_fn((rows, cols), || std * rng.sample::<f64, _>(StandardNormal))
}

fn standard(a: Array2<f64>) -> Array2<f64> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

/// Cached activations of an attention forward pass.
#[derive(Debug, Clone)]
pub struct AttentionCache {
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    /// Attention weights of frame `t` over frames `lo(t)..=t`.
    weights: Vec<Vec<f64>>,
    out: Array2<f64>,
}

#[derive(Debug, Clone)]
pub enum HeadCache {
    Linear,
    Attention(Box<AttentionCache>),
}

impl DecisionHead {
    pub fn init(
        variant: HeadVariant,
        dim: usize,
        num_classes: usize,
        hidden: usize,
        window: usize,
        seed: u64,
    ) -> Self {
        let in_std = 1.0 / (dim as f64).sqrt();
        match variant {
            HeadVariant::Linear => Self::Linear {
                weight: gaussian(num_classes, dim, in_std, seed, "head:weight"),
                bias: Array1::zeros(num_classes),
            },
            HeadVariant::Attention1 => Self::Attention {
                query: gaussian(hidden, dim, in_std, seed, "head:query"),
                key: gaussian(hidden, dim, in_std, seed, "head:key"),
                value: gaussian(hidden, dim, in_std, seed, "head:value"),
                output: gaussian(num_classes, hidden, 1.0 / (hidden as f64).sqrt(), seed, "head:output"),
                output_bias: Array1::zeros(num_classes),
                window: window.max(1),
            },
        }
    }

    pub fn variant(&self) -> HeadVariant {
        match self {
            Self::Linear { .. } => HeadVariant::Linear,
            Self::Attention { .. } => HeadVariant::Attention1,
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            Self::Linear { bias, .. } => bias.len(),
            Self::Attention { output_bias, .. } => output_bias.len(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Self::Linear { weight, .. } => weight.ncols(),
            Self::Attention { query, .. } => query.ncols(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        match self {
            Self::Linear { weight, bias } => Self::Linear {
                weight: Array2::zeros(weight.raw_dim()),
                bias: Array1::zeros(bias.raw_dim()),
            },
            Self::Attention { query, key, value, output, output_bias, window } => Self::Attention {
                query: Array2::zeros(query.raw_dim()),
                key: Array2::zeros(key.raw_dim()),
                value: Array2::zeros(value.raw_dim()),
                output: Array2::zeros(output.raw_dim()),
                output_bias: Array1::zeros(output_bias.raw_dim()),
                window: *window,
            },
        }
    }

    fn sl(a: &Array2<f64>) -> &[f64] {
        a.as_slice().expect("standard layout")
    }

    /// Named parameter tensors in a fixed order.
    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        match self {
            Self::Linear { weight, bias } => vec![
                ("head.weight", Self::sl(weight)),
                ("head.bias", bias.as_slice().expect("standard layout")),
            ],
            Self::Attention { query, key, value, output, output_bias, .. } => vec![
                ("head.query", Self::sl(query)),
                ("head.key", Self::sl(key)),
                ("head.value", Self::sl(value)),
                ("head.output", Self::sl(output)),
                ("head.output_bias", output_bias.as_slice().expect("standard layout")),
            ],
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        match self {
            Self::Linear { weight, bias } => vec![
                ("head.weight", weight.as_slice_mut().expect("standard layout")),
                ("head.bias", bias.as_slice_mut().expect("standard layout")),
            ],
            Self::Attention { query, key, value, output, output_bias, .. } => vec![
                ("head.query", query.as_slice_mut().expect("standard layout")),
                ("head.key", key.as_slice_mut().expect("standard layout")),
                ("head.value", value.as_slice_mut().expect("standard layout")),
                ("head.output", output.as_slice_mut().expect("standard layout")),
                ("head.output_bias", output_bias.as_slice_mut().expect("standard layout")),
            ],
        }
    }

    /// Logits for the ordered frames of one stream (`inputs` is `T x D`).
    pub fn forward(&self, inputs: &Array2<f64>) -> (Array2<f64>, HeadCache) {
        match self {
            Self::Linear { weight, bias } => {
                let logits = inputs.dot(&weight.t()) + bias;
                (logits, HeadCache::Linear)
            }
            Self::Attention { query, key, value, output, output_bias, window } => {
                let q = inputs.dot(&query.t());
                let k = inputs.dot(&key.t());
                let v = inputs.dot(&value.t());
                let frames = inputs.nrows();
                let scale = 1.0 / (q.ncols() as f64).sqrt();
                let mut out = Array2::zeros((frames, v.ncols()));
                let mut weights = Vec::with_capacity(frames);
                for t in 0..frames {
                    let lo = (t + 1).saturating_sub(*window);
                    let mut a: Vec<f64> = (lo..=t).map(|j| q.row(t).dot(&k.row(j)) * scale).collect();
                    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let mut sum = 0.0;
                    for x in a.iter_mut() {
                        *x = (*x - max).exp();
                        sum += *x;
                    }
                    for (offset, x) in a.iter_mut().enumerate() {
                        *x /= sum;
                        out.row_mut(t).scaled_add(*x, &v.row(lo + offset));
                    }
                    weights.push(a);
                }
                let logits = out.dot(&output.t()) + output_bias;
                (logits, HeadCache::Attention(Box::new(AttentionCache { q, k, v, weights, out })))
            }
        }
    }

    /// Parameter gradients and the per-frame input gradients (`T x D`) given
    /// the logit gradients of one stream.
    pub fn backward(&self, inputs: &Array2<f64>, cache: &HeadCache, dlogits: &Array2<f64>) -> (Self, Array2<f64>) {
        match (self, cache) {
            (Self::Linear { weight, .. }, HeadCache::Linear) => {
                let grad = Self::Linear {
                    weight: standard(dlogits.t().dot(inputs)),
                    bias: dlogits.sum_axis(Axis(0)),
                };
                (grad, dlogits.dot(weight))
            }
            (
                Self::Attention { query, key, value, output, window, .. },
                HeadCache::Attention(c),
            ) => {
                let frames = inputs.nrows();
                let scale = 1.0 / (c.q.ncols() as f64).sqrt();
                let d_out = dlogits.dot(output);
                let mut dq = Array2::<f64>::zeros(c.q.raw_dim());
                let mut dk = Array2::<f64>::zeros(c.k.raw_dim());
                let mut dv = Array2::<f64>::zeros(c.v.raw_dim());
                for t in 0..frames {
                    let lo = (t + 1).saturating_sub(*window);
                    let a = &c.weights[t];
                    let da: Vec<f64> = (lo..=t).map(|j| d_out.row(t).dot(&c.v.row(j))).collect();
                    let mean: f64 = a.iter().zip(&da).map(|(x, y)| x * y).sum();
                    for (offset, j) in (lo..=t).enumerate() {
                        dv.row_mut(j).scaled_add(a[offset], &d_out.row(t));
                        let ds = a[offset] * (da[offset] - mean) * scale;
                        let kj = c.k.row(j).to_owned();
                        dq.row_mut(t).scaled_add(ds, &kj);
                        let qt = c.q.row(t).to_owned();
                        dk.row_mut(j).scaled_add(ds, &qt);
                    }
                }
                let grad = Self::Attention {
                    query: standard(dq.t().dot(inputs)),
                    key: standard(dk.t().dot(inputs)),
                    value: standard(dv.t().dot(inputs)),
                    output: standard(dlogits.t().dot(&c.out)),
                    output_bias: dlogits.sum_axis(Axis(0)),
                    window: *window,
                };
                let dx = dq.dot(query) + dk.dot(key) + dv.dot(value);
                (grad, dx)
            }
            _ => unreachable!("cache variant always matches the head that produced it"),
        }
    }

    /// `self += alpha * other`.
    pub fn scaled_add(&mut self, alpha: f64, other: &Self) {
        for ((_, dst), (_, src)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += alpha * s;
            }
        }
    }

    pub fn window(&self) -> Option<usize> {
        match self {
            Self::Attention { window, .. } => Some(*window),
            Self::Linear { .. } => None,
        }
    }
}
