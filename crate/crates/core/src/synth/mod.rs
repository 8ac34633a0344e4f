//! Planted-structure tasks with known ground-truth reasoning paths.
//!
//! Frame labels are generated from specific paths of a layered graph, so a
//! refinement that keeps the right edges can be measured directly.

mod experiment;
mod metrics;
mod task;

pub use experiment::{
    random_baseline, run_experiment, sign_flip_p_value, BaselineStats, ExperimentConfig, ExperimentResult, SeedSummary,
};
pub use metrics::{auc_rank, auc_trapezoid, edge_prf, evaluate_recovery, prf, RecoveryReport};
pub use task::{generate, node_id, random_layered_graph, PlantedTask, PlantedTaskConfig};

use thiserror::Error;

use crate::hdc::HdcError;
use crate::refiner::RefineError;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible task: {0}")]
    Infeasible(String),
    #[error("refined graph contains unknown node {0:?}")]
    NodeSetMismatch(String),
    #[error("{probs} probability rows for {frames} frames")]
    Misaligned { probs: usize, frames: usize },
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Hdc(#[from] HdcError),
}
