//! Dynamic-programming encoding of a layered graph into one hypervector.
//!
//! A complete path `v1 -> ... -> vl` is encoded as the binding
//! `L1 ⊗ H(v1) ⊗ ... ⊗ Ll ⊗ H(vl)` and the graph hypervector is the bundle of
//! all path encodings. Bundling all paths directly is exponential in the
//! number of layers; the path memories `M` below carry the partial bundles so
//! the whole graph is encoded in `O((|V| + |E|) · D)`.
//!
//! With [`EncodeOptions::raw`] the DP result equals the brute-force path sum
//! exactly (up to float reassociation). The default mode normalizes each
//! message and averages over in-degree, which reweights paths but keeps the
//! memories bounded.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::FrameSample;
use crate::graph::{enumerate_paths, LayeredGraph, TooManyPaths};
use crate::hdc::{normalize, HdcError, HvSpace, Hypervector, ProjectionMap};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Hdc(#[from] HdcError),
    #[error("no hypervector for node {0:?}")]
    MissingNode(String),
    #[error("expected {expected} layer hypervectors, found {found}")]
    LayerCount { expected: usize, found: usize },
    #[error(transparent)]
    TooManyPaths(#[from] TooManyPaths),
}

/// Node hypervectors `H = phi(x)` and layer hypervectors `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct HvTables {
    pub node_hvs: BTreeMap<String, Hypervector>,
    /// Index 0 holds layer 1.
    pub layer_hvs: Vec<Hypervector>,
}

impl HvTables {
    pub fn dim(&self) -> usize {
        self.layer_hvs.first().map(Hypervector::dim).unwrap_or(0)
    }

    /// Layer hypervector for 1-based `layer`.
    pub fn layer(&self, layer: usize) -> &Hypervector {
        &self.layer_hvs[layer - 1]
    }

    pub fn node(&self, id: &str) -> Result<&Hypervector, EncodeError> {
        self.node_hvs
            .get(id)
            .ok_or_else(|| EncodeError::MissingNode(id.to_string()))
    }

    /// Checks that the tables cover `g` with one consistent dimension.
    pub fn check_against(&self, g: &LayeredGraph) -> Result<(), EncodeError> {
        if self.layer_hvs.len() != g.num_layers {
            return Err(EncodeError::LayerCount {
                expected: g.num_layers,
                found: self.layer_hvs.len(),
            });
        }
        let dim = self.dim();
        for l in &self.layer_hvs {
            l.expect_dim(dim)?;
        }
        for node in &g.nodes {
            self.node(&node.id)?.expect_dim(dim)?;
        }
        Ok(())
    }
}

/// Label of the layer hypervector sub-stream.
pub fn layer_label(layer: usize) -> String {
    format!("L:{layer}")
}

/// Projects node features and draws one bipolar base vector per layer.
pub fn assign_hvs(g: &LayeredGraph, space: &HvSpace, pm: &ProjectionMap) -> Result<HvTables, EncodeError> {
    if pm.input_dim() != g.feature_dim {
        return Err(HdcError::DimensionMismatch {
            expected: g.feature_dim,
            found: pm.input_dim(),
        }
        .into());
    }
    if pm.output_dim() != space.dim() {
        return Err(HdcError::DimensionMismatch {
            expected: space.dim(),
            found: pm.output_dim(),
        }
        .into());
    }
    let node_hvs = g
        .nodes
        .iter()
        .map(|n| Ok((n.id.clone(), pm.project(&n.features)?)))
        .collect::<Result<BTreeMap<_, _>, HdcError>>()?;
    let layer_hvs = (1..=g.num_layers).map(|i| space.base_hv(&layer_label(i))).collect();
    Ok(HvTables { node_hvs, layer_hvs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeOptions {
    /// Normalize each incoming message to unit length.
    pub apply_norm: bool,
    /// Divide each memory by its in-degree.
    pub in_degree_average: bool,
    /// Normalize the final graph hypervector.
    #[serde(default)]
    pub normalize_output: bool,
}

impl EncodeOptions {
    pub const fn normalized() -> Self {
        Self {
            apply_norm: true,
            in_degree_average: true,
            normalize_output: false,
        }
    }

    pub const fn raw() -> Self {
        Self {
            apply_norm: false,
            in_degree_average: false,
            normalize_output: false,
        }
    }
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self::normalized()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEncoding {
    pub graph_hv: Hypervector,
    pub memories: BTreeMap<String, Hypervector>,
}

/// `L ⊗ M ⊗ H` for one node, optionally normalized.
fn message(layer: &Hypervector, memory: &Hypervector, node: &Hypervector, norm: bool) -> Hypervector {
    let values = layer
        .as_slice()
        .iter()
        .zip(memory.as_slice())
        .zip(node.as_slice())
        .map(|((l, m), h)| l * m * h)
        .collect();
    let out = Hypervector::from_vec(values);
    if norm {
        normalize(&out)
    } else {
        out
    }
}

/// Encodes `g` with the path-memory recursion.
///
/// Layer-1 memories are all-ones. A node on layer `d >= 2` bundles the
/// messages `L(d-1) ⊗ M(t) ⊗ H(t)` of its predecessors `t`; a node without
/// predecessors gets the zero memory, which annihilates every path through
/// it. Predecessors are reduced in sorted id order, so the result does not
/// depend on node or edge insertion order.
pub fn encode_graph(g: &LayeredGraph, t: &HvTables, opt: EncodeOptions) -> Result<GraphEncoding, EncodeError> {
    t.check_against(g)?;
    let dim = t.dim();
    let layers = g.layers();
    let preds = g.in_neighbors();
    let mut memories: BTreeMap<String, Hypervector> = BTreeMap::new();
    let Some(first) = layers.first() else {
        return Ok(GraphEncoding {
            graph_hv: Hypervector::zeros(dim),
            memories,
        });
    };
    for node in first {
        memories.insert(node.id.clone(), Hypervector::ones(dim));
    }
    for d in 2..=g.num_layers {
        let source_layer = t.layer(d - 1);
        let outgoing: HashMap<&str, Hypervector> = layers[d - 2]
            .par_iter()
            .map(|n| {
                let m = &memories[&n.id];
                (n.id.as_str(), message(source_layer, m, &t.node_hvs[&n.id], opt.apply_norm))
            })
            .collect();
        let new: Vec<(String, Hypervector)> = layers[d - 1]
            .par_iter()
            .map(|n| {
                let mut acc = Hypervector::zeros(dim);
                let incoming = preds.get(n.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
                for p in incoming {
                    let msg = &outgoing[p];
                    for (a, b) in acc.as_mut_slice().iter_mut().zip(msg.as_slice()) {
                        *a += b;
                    }
                }
                if opt.in_degree_average && !incoming.is_empty() {
                    acc = acc.scaled(1.0 / incoming.len() as f64);
                }
                (n.id.clone(), acc)
            })
            .collect();
        memories.extend(new);
    }
    let last = g.num_layers;
    let mut graph_hv = Hypervector::zeros(dim);
    for n in &layers[last - 1] {
        let term = message(t.layer(last), &memories[&n.id], &t.node_hvs[&n.id], false);
        graph_hv.add_assign(&term)?;
    }
    if opt.normalize_output {
        graph_hv = normalize(&graph_hv);
    }
    Ok(GraphEncoding { graph_hv, memories })
}

/// Bundles the bound encoding of every complete path (exponential oracle).
pub fn encode_bruteforce(g: &LayeredGraph, t: &HvTables) -> Result<Hypervector, EncodeError> {
    t.check_against(g)?;
    let mut acc = Hypervector::zeros(t.dim());
    for path in enumerate_paths(g)? {
        let mut prod = Hypervector::ones(t.dim());
        for (i, id) in path.iter().enumerate() {
            prod.bind_assign(t.layer(i + 1))?;
            prod.bind_assign(t.node(id)?)?;
        }
        acc.add_assign(&prod)?;
    }
    Ok(acc)
}

/// `H_G' = H_G ⊕ H_E`.
pub fn augment(graph_hv: &Hypervector, edit_hv: &Hypervector) -> Result<Hypervector, HdcError> {
    let mut out = graph_hv.clone();
    out.add_assign(edit_hv)?;
    Ok(out)
}

/// `H_input = phi(I) ⊕ H_G'`.
pub fn compose_input(frame: &FrameSample, augmented: &Hypervector, pm: &ProjectionMap) -> Result<Hypervector, HdcError> {
    let mut out = pm.project(&frame.features)?;
    out.add_assign(augmented)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;
    use crate::hdc::{bind_all, similarity};

    fn chain(features: &[Vec<f64>]) -> LayeredGraph {
        let mut g = LayeredGraph::new(features.len(), features[0].len());
        for (i, f) in features.iter().enumerate() {
            g.nodes.push(Node::new(format!("n{}", i + 1), i + 1, f.clone()));
        }
        g.edges = g.candidate_edges();
        g
    }

    fn setup(g: &LayeredGraph, dim: usize) -> HvTables {
        let space = HvSpace::new(dim, 9).unwrap();
        let pm = ProjectionMap::phi(dim, g.feature_dim, 9).unwrap();
        assign_hvs(g, &space, &pm).unwrap()
    }

    #[test]
    fn two_layer_chain_raw_mode_is_the_path_product() {
        let g = chain(&[vec![1.0, 0.5], vec![-0.3, 2.0]]);
        let t = setup(&g, 64);
        let enc = encode_graph(&g, &t, EncodeOptions::raw()).unwrap();
        let expected = bind_all([t.layer(1), t.node("n1").unwrap(), t.layer(2), t.node("n2").unwrap()]).unwrap();
        for (a, b) in enc.graph_hv.as_slice().iter().zip(expected.as_slice()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn zero_features_give_zero_node_hv_and_equal_features_match() {
        let mut g = chain(&[vec![0.0, 0.0], vec![1.0, 1.0]]);
        g.nodes.push(Node::new("twin", 2, vec![1.0, 1.0]));
        let t = setup(&g, 32);
        assert!(t.node("n1").unwrap().is_zero());
        assert_eq!(t.node("n2").unwrap(), t.node("twin").unwrap());
    }

    #[test]
    fn layer_hvs_are_quasi_orthogonal() {
        let g = chain(&[vec![1.0], vec![1.0], vec![1.0]]);
        let t = setup(&g, 10_000);
        for i in 1..=3 {
            for j in (i + 1)..=3 {
                assert!(similarity(t.layer(i), t.layer(j)).unwrap().abs() < 0.05);
            }
        }
    }

    #[test]
    fn no_complete_path_bruteforce_is_zero() {
        let mut g = chain(&[vec![1.0], vec![1.0], vec![1.0]]);
        g.edges.truncate(1);
        let t = setup(&g, 16);
        assert!(encode_bruteforce(&g, &t).unwrap().is_zero());
        assert!(encode_graph(&g, &t, EncodeOptions::raw()).unwrap().graph_hv.is_zero());
    }

    #[test]
    fn inconsistent_tables_are_rejected() {
        let g = chain(&[vec![1.0], vec![1.0]]);
        let mut t = setup(&g, 16);
        t.node_hvs.remove("n2");
        assert!(matches!(encode_graph(&g, &t, EncodeOptions::raw()), Err(EncodeError::MissingNode(_))));
        let mut t = setup(&g, 16);
        t.layer_hvs.pop();
        assert!(encode_graph(&g, &t, EncodeOptions::raw()).is_err());
    }

    #[test]
    fn projection_width_must_match_features() {
        let g = chain(&[vec![1.0, 2.0], vec![1.0, 2.0]]);
        let space = HvSpace::new(16, 1).unwrap();
        let pm = ProjectionMap::phi(16, 3, 1).unwrap();
        assert!(assign_hvs(&g, &space, &pm).is_err());
    }

    #[test]
    fn augment_cases() {
        let h = Hypervector::from_vec(vec![1.0, -2.0, 3.0]);
        assert_eq!(augment(&h, &Hypervector::zeros(3)).unwrap(), h);
        assert!(augment(&h, &h.negated()).unwrap().is_zero());
        assert!(augment(&h, &Hypervector::zeros(4)).is_err());
    }

    #[test]
    fn small_edit_keeps_similarity_positive() {
        let space = HvSpace::new(10_000, 3).unwrap();
        let hg = space.base_hv("g");
        let he = space.base_hv("e").scaled(0.1);
        let aug = augment(&hg, &he).unwrap();
        assert!(similarity(&aug, &hg).unwrap() > 0.0);
    }

    #[test]
    fn compose_input_cases() {
        let pm = ProjectionMap::phi(32, 3, 4).unwrap();
        let frame = FrameSample { stream_id: "s".into(), frame_index: 0, features: vec![0.0; 3], label: 0 };
        let a = Hypervector::from_vec((0..32).map(|i| i as f64).collect());
        assert_eq!(compose_input(&frame, &a, &pm).unwrap(), a);
        let frame = FrameSample { features: vec![1.0, -1.0, 0.5], ..frame };
        let phi = pm.project(&frame.features).unwrap();
        assert_eq!(compose_input(&frame, &Hypervector::zeros(32), &pm).unwrap(), phi);
        let b = Hypervector::from_vec(vec![0.25; 32]);
        let lhs = compose_input(&frame, &augment(&a, &b).unwrap(), &pm).unwrap();
        let rhs = augment(&compose_input(&frame, &a, &pm).unwrap(), &b).unwrap();
        for (x, y) in lhs.as_slice().iter().zip(rhs.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
        let short = FrameSample { features: vec![1.0], ..frame };
        assert!(compose_input(&short, &a, &pm).is_err());
    }
}
