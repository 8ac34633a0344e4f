use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::data::{Dataset, FrameSample};
use crate::graph::{Edge, LayeredGraph, Node};
use crate::hdc::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedTaskConfig {
    pub num_layers: usize,
    pub nodes_per_layer: usize,
    pub num_planted_paths: usize,
    pub num_spurious_edges: usize,
    pub feature_dim: usize,
    pub num_streams: usize,
    pub frames_per_stream: usize,
    /// Class count including the normal class 0; defaults to
    /// `num_planted_paths + 1`.
    pub num_classes: Option<usize>,
    pub signal_strength: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for PlantedTaskConfig {
    fn default() -> Self {
        Self {
            num_layers: 4,
            nodes_per_layer: 4,
            num_planted_paths: 3,
            num_spurious_edges: 10,
            feature_dim: 16,
            num_streams: 10,
            frames_per_stream: 20,
            num_classes: None,
            signal_strength: 1.0,
            noise_std: 0.25,
            seed: 0,
        }
    }
}

impl PlantedTaskConfig {
    pub fn classes(&self) -> usize {
        self.num_classes.unwrap_or(self.num_planted_paths + 1)
    }

    fn check(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::Infeasible(msg));
        if self.num_layers < 2 || self.nodes_per_layer == 0 {
            return bad("need at least two layers and one node per layer".into());
        }
        if self.num_planted_paths == 0 || self.num_planted_paths > self.nodes_per_layer {
            return bad(format!(
                "{} planted paths do not fit layers of width {}",
                self.num_planted_paths, self.nodes_per_layer
            ));
        }
        let classes = self.classes();
        if classes < 2 || classes > self.num_planted_paths + 1 {
            return bad(format!("num_classes {classes} outside 2..={}", self.num_planted_paths + 1));
        }
        let candidates = (self.num_layers - 1) * self.nodes_per_layer * self.nodes_per_layer;
        let planted = (self.num_layers - 1) * self.num_planted_paths;
        if self.num_spurious_edges > candidates - planted {
            return bad(format!(
                "{} spurious edges requested but only {} non-planted candidates exist",
                self.num_spurious_edges,
                candidates - planted
            ));
        }
        if self.feature_dim == 0 || self.num_streams == 0 || self.frames_per_stream == 0 {
            return bad("feature_dim, num_streams and frames_per_stream must be positive".into());
        }
        if !(self.signal_strength.is_finite() && self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad("signal_strength and noise_std must be finite, noise_std >= 0".into());
        }
        Ok(())
    }
}

/// Generated graph, frames and ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTask {
    pub graph: LayeredGraph,
    #[serde(skip)]
    pub dataset: Option<Dataset>,
    pub planted_edges: BTreeSet<Edge>,
    pub spurious_edges: BTreeSet<Edge>,
    /// Anomaly class `c >= 1` to its planted path (node ids, layer 1 first).
    pub class_to_path: BTreeMap<usize, Vec<String>>,
}

impl PlantedTask {
    pub fn dataset(&self) -> &Dataset {
        self.dataset.as_ref().expect("generated tasks carry their dataset")
    }
}

pub fn node_id(layer: usize, index: usize) -> String {
    format!("l{layer}n{index}")
}

/// Builds a planted task deterministically from `cfg.seed`.
///
/// Planted path `p` visits node `perm_l[p]` on each layer `l`, so paths are
/// node-disjoint. Spurious edges are drawn uniformly from the remaining
/// candidates. Stream `s` carries class `s mod C`; a stream of class `c > 0`
/// is normal except for its middle half, whose frames are
/// `signal_strength * mean(features on path c) + N(0, noise_std^2)`.
pub fn generate(cfg: &PlantedTaskConfig) -> Result<PlantedTask, SynthError> {
    cfg.check()?;
    let (ell, w, m) = (cfg.num_layers, cfg.nodes_per_layer, cfg.feature_dim);

    let mut rng = substream(cfg.seed, "synth:nodes");
    let mut graph = LayeredGraph::new(ell, m);
    for layer in 1..=ell {
        for i in 0..w {
            let features = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            graph.nodes.push(Node::new(node_id(layer, i), layer, features));
        }
    }

    let mut rng = substream(cfg.seed, "synth:paths");
    let perms: Vec<Vec<usize>> = (0..ell)
        .map(|_| {
            let mut p: Vec<usize> = (0..w).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let paths: Vec<Vec<String>> = (0..cfg.num_planted_paths)
        .map(|p| (0..ell).map(|l| node_id(l + 1, perms[l][p])).collect())
        .collect();
    let planted_edges: BTreeSet<Edge> = paths
        .iter()
        .flat_map(|path| path.windows(2).map(|e| (e[0].clone(), e[1].clone())))
        .collect();

    let pool: Vec<Edge> = graph
        .candidate_edges()
        .into_iter()
        .filter(|e| !planted_edges.contains(e))
        .collect();
    let mut rng = substream(cfg.seed, "synth:spurious");
    let spurious_edges: BTreeSet<Edge> = sample(&mut rng, pool.len(), cfg.num_spurious_edges)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect();
    graph.edges = planted_edges.union(&spurious_edges).cloned().collect();

    let classes = cfg.classes();
    let class_to_path: BTreeMap<usize, Vec<String>> = (1..classes).map(|c| (c, paths[c - 1].clone())).collect();
    let node_map = graph.node_map();
    let prototypes: BTreeMap<usize, Vec<f64>> = class_to_path
        .iter()
        .map(|(&c, path)| {
            let mut mean = vec![0.0; m];
            for id in path {
                for (a, b) in mean.iter_mut().zip(&node_map[id.as_str()].features) {
                    *a += b / path.len() as f64;
                }
            }
            (c, mean)
        })
        .collect();

    let mut rng = substream(cfg.seed, "synth:frames");
    let t_len = cfg.frames_per_stream;
    let (lo, hi) = (t_len / 4, (3 * t_len).div_ceil(4));
    let width = cfg.num_streams.to_string().len();
    let mut frames = Vec::with_capacity(cfg.num_streams * t_len);
    for s in 0..cfg.num_streams {
        let stream_class = s % classes;
        for t in 0..t_len {
            let label = if stream_class > 0 && (lo..hi).contains(&t) { stream_class } else { 0 };
            let features = (0..m)
                .map(|j| {
                    let signal = prototypes.get(&label).map_or(0.0, |p| cfg.signal_strength * p[j]);
                    signal + cfg.noise_std * rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            frames.push(FrameSample {
                stream_id: format!("s{s:0width$}"),
                frame_index: t as u64,
                features,
                label,
            });
        }
    }
    let dataset = Dataset::new(frames).map_err(|e| SynthError::Infeasible(e.to_string()))?;
    Ok(PlantedTask {
        graph,
        dataset: Some(dataset),
        planted_edges,
        spurious_edges,
        class_to_path,
    })
}

/// Random layered graph with `1..=max_width` nodes per layer, Gaussian
/// features and each adjacent-layer candidate kept with probability
/// `density`.
pub fn random_layered_graph(num_layers: usize, max_width: usize, density: f64, feature_dim: usize, seed: u64) -> LayeredGraph {
    let mut rng = substream(seed, "synth:random-graph");
    let mut g = LayeredGraph::new(num_layers, feature_dim);
    for layer in 1..=num_layers {
        let width = rng.random_range(1..=max_width.max(1));
        for i in 0..width {
            let features = (0..feature_dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            g.nodes.push(Node::new(node_id(layer, i), layer, features));
        }
    }
    g.edges = g
        .candidate_edges()
        .into_iter()
        .filter(|_| rng.random_bool(density.clamp(0.0, 1.0)))
        .collect();
    g
}
