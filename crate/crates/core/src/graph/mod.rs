//! Layered reasoning graphs.
//!
//! Nodes live on 1-based layers `1..=num_layers` and edges may only connect
//! layer `i` to layer `i + 1`, which makes every graph acyclic by
//! construction.

mod dot;
mod io;
mod paths;

pub use dot::emit_dot;
pub use io::{load_graph, save_graph, GraphIoError};
pub use paths::{count_paths, enumerate_paths, ReasoningPath, TooManyPaths, PATH_ENUMERATION_LIMIT};

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub type Edge = (String, String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub layer: usize,
    #[serde(default)]
    pub label: String,
    pub features: Vec<f64>,
}

impl Node {
    pub fn new(id: impl Into<String>, layer: usize, features: Vec<f64>) -> Self {
        let id = id.into();
        Self {
            label: id.clone(),
            id,
            layer,
            features,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredGraph {
    pub num_layers: usize,
    pub feature_dim: usize,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoLayers,
    DuplicateNode(String),
    LayerOutOfRange { node: String, layer: usize },
    FeatureLength { node: String, expected: usize, found: usize },
    NonFiniteFeature(String),
    DanglingEndpoint { src: String, dst: String },
    NonAdjacentLayers { src: String, dst: String },
    DuplicateEdge { src: String, dst: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoLayers => write!(f, "graph must have at least one layer"),
            Self::DuplicateNode(id) => write!(f, "duplicate node id {id:?}"),
            Self::LayerOutOfRange { node, layer } => {
                write!(f, "node {node:?} has layer {layer} outside 1..=num_layers")
            }
            Self::FeatureLength { node, expected, found } => write!(
                f,
                "inconsistent feature length on {node:?}: expected {expected}, found {found}"
            ),
            Self::NonFiniteFeature(id) => write!(f, "non-finite feature on {id:?}"),
            Self::DanglingEndpoint { src, dst } => {
                write!(f, "dangling endpoint in edge {src:?} -> {dst:?}")
            }
            Self::NonAdjacentLayers { src, dst } => {
                write!(f, "edge {src:?} -> {dst:?} joins non-adjacent layers")
            }
            Self::DuplicateEdge { src, dst } => write!(f, "duplicate edge {src:?} -> {dst:?}"),
        }
    }
}

/// Outcome of [`LayeredGraph::validate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

impl LayeredGraph {
    pub fn new(num_layers: usize, feature_dim: usize) -> Self {
        Self {
            num_layers,
            feature_dim,
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.num_layers == 0 {
            violations.push(Violation::NoLayers);
        }
        let mut layer_of: HashMap<&str, usize> = HashMap::new();
        for node in &self.nodes {
            if layer_of.insert(&node.id, node.layer).is_some() {
                violations.push(Violation::DuplicateNode(node.id.clone()));
            }
            if node.layer == 0 || node.layer > self.num_layers {
                violations.push(Violation::LayerOutOfRange {
                    node: node.id.clone(),
                    layer: node.layer,
                });
            }
            if node.features.len() != self.feature_dim {
                violations.push(Violation::FeatureLength {
                    node: node.id.clone(),
                    expected: self.feature_dim,
                    found: node.features.len(),
                });
            }
            if node.features.iter().any(|v| !v.is_finite()) {
                violations.push(Violation::NonFiniteFeature(node.id.clone()));
            }
        }
        let mut seen: HashSet<(&str, &str)> = HashSet::new();
        for (src, dst) in &self.edges {
            match (layer_of.get(src.as_str()), layer_of.get(dst.as_str())) {
                (Some(&a), Some(&b)) => {
                    if b != a + 1 {
                        violations.push(Violation::NonAdjacentLayers {
                            src: src.clone(),
                            dst: dst.clone(),
                        });
                    }
                }
                _ => violations.push(Violation::DanglingEndpoint {
                    src: src.clone(),
                    dst: dst.clone(),
                }),
            }
            if !seen.insert((src, dst)) {
                violations.push(Violation::DuplicateEdge {
                    src: src.clone(),
                    dst: dst.clone(),
                });
            }
        }
        ValidationReport { violations }
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Node lookup table by id.
    pub fn node_map(&self) -> HashMap<&str, &Node> {
        self.nodes.iter().map(|n| (n.id.as_str(), n)).collect()
    }

    /// Nodes of each layer sorted by id; index 0 holds layer 1.
    pub fn layers(&self) -> Vec<Vec<&Node>> {
        let mut layers: Vec<Vec<&Node>> = vec![Vec::new(); self.num_layers];
        for node in &self.nodes {
            if (1..=self.num_layers).contains(&node.layer) {
                layers[node.layer - 1].push(node);
            }
        }
        for layer in &mut layers {
            layer.sort_by(|a, b| a.id.cmp(&b.id));
        }
        layers
    }

    /// Sorted predecessor ids per node id.
    pub fn in_neighbors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut map: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (src, dst) in &self.edges {
            map.entry(dst.as_str()).or_default().push(src.as_str());
        }
        for preds in map.values_mut() {
            preds.sort_unstable();
        }
        map
    }

    /// Sorted successor ids per node id.
    pub fn out_neighbors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut map: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (src, dst) in &self.edges {
            map.entry(src.as_str()).or_default().push(dst.as_str());
        }
        for succs in map.values_mut() {
            succs.sort_unstable();
        }
        map
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges.iter().cloned().collect()
    }

    /// All adjacent-layer node pairs, the candidate set for refinement.
    pub fn candidate_edges(&self) -> Vec<Edge> {
        let layers = self.layers();
        let mut out = Vec::new();
        for pair in layers.windows(2) {
            for src in &pair[0] {
                for dst in &pair[1] {
                    out.push((src.id.clone(), dst.id.clone()));
                }
            }
        }
        out
    }

    /// Same nodes, replaced edge set.
    pub fn with_edges(&self, edges: Vec<Edge>) -> Self {
        Self {
            num_layers: self.num_layers,
            feature_dim: self.feature_dim,
            nodes: self.nodes.clone(),
            edges,
        }
    }

    /// Drops nodes that touch no edge.
    pub fn without_isolated_nodes(&self) -> Self {
        let touched: HashSet<&str> = self
            .edges
            .iter()
            .flat_map(|(s, d)| [s.as_str(), d.as_str()])
            .collect();
        Self {
            num_layers: self.num_layers,
            feature_dim: self.feature_dim,
            nodes: self
                .nodes
                .iter()
                .filter(|n| touched.contains(n.id.as_str()))
                .cloned()
                .collect(),
            edges: self.edges.clone(),
        }
    }

    /// Layer-reversed copy: layer `i` becomes `num_layers + 1 - i` and every
    /// edge flips direction.
    pub fn mirrored(&self) -> Self {
        Self {
            num_layers: self.num_layers,
            feature_dim: self.feature_dim,
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    layer: self.num_layers + 1 - n.layer,
                    ..n.clone()
                })
                .collect(),
            edges: self.edges.iter().map(|(s, d)| (d.clone(), s.clone())).collect(),
        }
    }
}
