use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{PlantedTask, SynthError};
use crate::graph::{Edge, LayeredGraph};
use crate::refiner::EdgeScoreTable;

/// Precision, recall and F1 from counts. An empty prediction has precision
/// 0 unless the truth is empty too.
pub fn prf(true_positives: usize, predicted: usize, actual: usize) -> (f64, f64, f64) {
    if predicted == 0 && actual == 0 {
        return (1.0, 1.0, 1.0);
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let p = ratio(true_positives, predicted);
    let r = ratio(true_positives, actual);
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

/// Edge-set precision, recall and F1 against `truth`.
pub fn edge_prf(predicted: &BTreeSet<Edge>, truth: &BTreeSet<Edge>) -> (f64, f64, f64) {
    prf(predicted.intersection(truth).count(), predicted.len(), truth.len())
}

/// AUC as the Mann–Whitney statistic with mid-ranks for ties. `None` when
/// one of the classes is empty.
pub fn auc_rank(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += order[i..=j].iter().filter(|&&k| positive[k]).count() as f64 * mid;
        i = j + 1;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// AUC as the trapezoidal area under the ROC curve, stepping through tied
/// scores together.
pub fn auc_trapezoid(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = positive.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp, mut area) = (0.0, 0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let (prev_tpr, prev_fpr) = (tp / n_pos, fp / n_neg);
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if positive[order[i]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        area += (fp / n_neg - prev_fpr) * (tp / n_pos + prev_tpr) / 2.0;
    }
    Some(area)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_planted_score: f64,
    pub mean_spurious_score: f64,
    /// One-vs-rest AUC of `p_c` for each anomaly class present in the data.
    pub per_class_auc: BTreeMap<usize, f64>,
    /// AUC of `1 - p_0` for anomalous-vs-normal frames.
    pub normal_auc: Option<f64>,
    /// Unweighted mean of `per_class_auc`.
    pub mauc: Option<f64>,
    pub refined_edges: usize,
    pub planted_edges: usize,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Compares a refined graph with the planted truth.
///
/// `scores` supplies the planted/spurious score means (edges missing from
/// the table are skipped). `class_probs`, when given, holds one distribution
/// per dataset frame in dataset order and fills the AUC fields.
pub fn evaluate_recovery(
    refined: &LayeredGraph,
    scores: &EdgeScoreTable,
    task: &PlantedTask,
    class_probs: Option<&[Vec<f64>]>,
) -> Result<RecoveryReport, SynthError> {
    let known: BTreeSet<&str> = task.graph.nodes.iter().map(|n| n.id.as_str()).collect();
    if let Some(n) = refined.nodes.iter().find(|n| !known.contains(n.id.as_str())) {
        return Err(SynthError::NodeSetMismatch(n.id.clone()));
    }
    let predicted = refined.edge_set();
    let (precision, recall, f1) = edge_prf(&predicted, &task.planted_edges);
    let lookup = |set: &BTreeSet<Edge>| -> Vec<f64> { set.iter().filter_map(|(s, d)| scores.get(s, d)).collect() };
    let mean_planted_score = mean(&lookup(&task.planted_edges));
    let mean_spurious_score = mean(&lookup(&task.spurious_edges));

    let mut per_class_auc = BTreeMap::new();
    let mut normal_auc = None;
    if let Some(probs) = class_probs {
        let labels = task.dataset().labels();
        if probs.len() != labels.len() {
            return Err(SynthError::Misaligned { probs: probs.len(), frames: labels.len() });
        }
        let classes = probs.first().map_or(0, Vec::len);
        for c in 1..classes {
            let s: Vec<f64> = probs.iter().map(|p| p[c]).collect();
            let pos: Vec<bool> = labels.iter().map(|&y| y == c).collect();
            if let Some(a) = auc_rank(&s, &pos) {
                per_class_auc.insert(c, a);
            }
        }
        let s: Vec<f64> = probs.iter().map(|p| 1.0 - p[0]).collect();
        let pos: Vec<bool> = labels.iter().map(|&y| y != 0).collect();
        normal_auc = auc_rank(&s, &pos);
    }
    let mauc = (!per_class_auc.is_empty()).then(|| mean(&per_class_auc.values().copied().collect::<Vec<_>>()));
    Ok(RecoveryReport {
        precision,
        recall,
        f1,
        mean_planted_score,
        mean_spurious_score,
        per_class_auc,
        normal_auc,
        mauc,
        refined_edges: predicted.len(),
        planted_edges: task.planted_edges.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_extremes_and_ties() {
        let pos = [false, false, true, true];
        assert_eq!(auc_rank(&[0.1, 0.2, 0.8, 0.9], &pos), Some(1.0));
        assert_eq!(auc_rank(&[0.9, 0.8, 0.2, 0.1], &pos), Some(0.0));
        assert_eq!(auc_rank(&[0.5; 4], &pos), Some(0.5));
        assert_eq!(auc_trapezoid(&[0.5; 4], &pos), Some(0.5));
        assert_eq!(auc_rank(&[0.5; 2], &[true, true]), None);
    }

    #[test]
    fn prf_cases() {
        assert_eq!(prf(3, 3, 3), (1.0, 1.0, 1.0));
        assert_eq!(prf(0, 0, 3), (0.0, 0.0, 0.0));
        assert_eq!(prf(0, 0, 0), (1.0, 1.0, 1.0));
        let (p, r, _) = prf(9, 48, 9);
        assert_eq!((p, r), (9.0 / 48.0, 1.0));
    }
}
