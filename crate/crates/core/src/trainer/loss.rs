use serde::{Deserialize, Serialize};

use super::TrainError;

/// `total = ce + lambda * smooth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub ce: f64,
    pub smooth: f64,
}

/// Class distributions and labels of one stream, in frame order.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamPredictions {
    pub probs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

/// Frame-level cross-entropy plus a temporal smoothness penalty.
///
/// `ce` is the mean of `-ln p[label]` over all frames. `smooth` is the mean
/// of `||p_t - p_{t-1}||^2` over consecutive frame pairs within a stream; it
/// is zero when no stream has two frames.
pub fn task_loss(streams: &[StreamPredictions], lambda: f64) -> Result<LossParts, TrainError> {
    let mut ce_sum = 0.0;
    let mut frames = 0usize;
    let mut smooth_sum = 0.0;
    let mut pairs = 0usize;
    for s in streams {
        if s.probs.len() != s.labels.len() {
            return Err(TrainError::Misaligned {
                probs: s.probs.len(),
                labels: s.labels.len(),
            });
        }
        for (p, &y) in s.probs.iter().zip(&s.labels) {
            let py = *p.get(y).ok_or(TrainError::LabelOutOfRange { label: y, classes: p.len() })?;
            ce_sum -= py.ln();
            frames += 1;
        }
        for w in s.probs.windows(2) {
            smooth_sum += w[1].iter().zip(&w[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            pairs += 1;
        }
    }
    if frames == 0 {
        return Err(TrainError::EmptyData);
    }
    let ce = ce_sum / frames as f64;
    let smooth = if pairs == 0 { 0.0 } else { smooth_sum / pairs as f64 };
    Ok(LossParts {
        total: ce + lambda * smooth,
        ce,
        smooth,
    })
}
