use std::collections::BTreeMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{evaluate_loss, loss_and_grad, prepare_batch, RefineModel, TrainError};
use crate::data::Dataset;
use crate::hdc::{substream, Hypervector, ProjectionMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckOptions {
    /// Central-difference step.
    pub step: f64,
    /// Coordinates checked per tensor; `None` checks all of them.
    pub max_coords_per_tensor: Option<usize>,
    pub seed: u64,
    /// Denominator floor of the relative error.
    pub floor: f64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            step: 1e-5,
            max_coords_per_tensor: Some(64),
            seed: 0,
            floor: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub per_tensor: BTreeMap<String, f64>,
    pub coords_checked: usize,
}

/// `|a - n| / max(|a| + |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(floor)
}

/// Compares analytic gradients of the task loss with central differences.
///
/// Every parameter tensor is checked, including `P` when it is frozen for
/// training.
pub fn grad_check(
    model: &RefineModel,
    graph_hv: &Hypervector,
    data: &Dataset,
    pm: &ProjectionMap,
    opts: &GradCheckOptions,
) -> Result<GradCheckReport, TrainError> {
    let batch = prepare_batch(graph_hv, data, pm)?;
    let (_, grads) = loss_and_grad(model, &batch)?;
    let analytic: Vec<(&'static str, Vec<f64>)> =
        grads.tensors().into_iter().map(|(n, t)| (n, t.to_vec())).collect();
    let mut probe = model.clone();
    let mut per_tensor = BTreeMap::new();
    let mut coords_checked = 0;
    for (ti, (name, grad)) in analytic.iter().enumerate() {
        let len = grad.len();
        let coords: Vec<usize> = match opts.max_coords_per_tensor {
            Some(k) if k < len => {
                let mut rng = substream(opts.seed, &format!("gradcheck:{name}"));
                let mut c = sample(&mut rng, len, k).into_vec();
                c.sort_unstable();
                c
            }
            _ => (0..len).collect(),
        };
        let mut worst: f64 = 0.0;
        for &i in &coords {
            let original = probe.tensors()[ti].1[i];
            probe.tensors_mut()[ti].1[i] = original + opts.step;
            let plus = evaluate_loss(&probe, &batch)?.total;
            probe.tensors_mut()[ti].1[i] = original - opts.step;
            let minus = evaluate_loss(&probe, &batch)?.total;
            probe.tensors_mut()[ti].1[i] = original;
            let numeric = (plus - minus) / (2.0 * opts.step);
            worst = worst.max(relative_error(grad[i], numeric, opts.floor));
        }
        coords_checked += coords.len();
        per_tensor.insert(name.to_string(), worst);
    }
    let max_rel_error = per_tensor.values().copied().fold(0.0, f64::max);
    Ok(GradCheckReport {
        max_rel_error,
        per_tensor,
        coords_checked,
    })
}
