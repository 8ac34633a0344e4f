//! GrapHD-style encoding of general undirected graphs.
//!
//! `E_G = (1/|V|) Σ_i E_i ⊗ M_i` where `M_i` bundles the base vectors of the
//! neighbors of `i`. An edge `(i, j)` is decoded when
//! `δ(E_G ⊗ E_i, E_j) > τ`. With bipolar bases each true edge contributes
//! `2/|V|` to that similarity and every other term is noise of order
//! `1/√D`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hdc::{similarity, HvSpace, Hypervector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimpleGraphError {
    #[error("self-loop on {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge {0:?} -- {1:?}")]
    DuplicateEdge(String, String),
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("edge endpoint {0:?} is not a node")]
    UnknownNode(String),
}

/// Unweighted graph; `edges` is undirected unless encoded as directed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimpleGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl SimpleGraph {
    pub fn validate(&self) -> Result<(), SimpleGraphError> {
        let mut nodes = BTreeSet::new();
        for n in &self.nodes {
            if !nodes.insert(n.as_str()) {
                return Err(SimpleGraphError::DuplicateNode(n.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for (a, b) in &self.edges {
            for end in [a, b] {
                if !nodes.contains(end.as_str()) {
                    return Err(SimpleGraphError::UnknownNode(end.clone()));
                }
            }
            if a == b {
                return Err(SimpleGraphError::SelfLoop(a.clone()));
            }
            if !seen.insert(key(a, b)) {
                return Err(SimpleGraphError::DuplicateEdge(a.clone(), b.clone()));
            }
        }
        Ok(())
    }

    /// Edges as unordered pairs `(min, max)`.
    pub fn undirected_edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges.iter().map(|(a, b)| key(a, b)).collect()
    }
}

/// Base vector label of a node.
pub fn node_label(id: &str) -> String {
    format!("node:{id}")
}

/// Default decode threshold `0.5/|V|`.
pub fn default_threshold(num_nodes: usize) -> f64 {
    0.5 / num_nodes.max(1) as f64
}

fn base_table(ids: &[String], space: &HvSpace) -> BTreeMap<String, Hypervector> {
    ids.iter().map(|id| (id.clone(), space.base_hv(&node_label(id)))).collect()
}

/// Encodes an undirected graph. Isolated nodes contribute nothing.
pub fn graphd_encode(g: &SimpleGraph, space: &HvSpace) -> Result<Hypervector, SimpleGraphError> {
    g.validate()?;
    let base = base_table(&g.nodes, space);
    let mut memories: BTreeMap<&str, Hypervector> = BTreeMap::new();
    for (a, b) in &g.edges {
        memories
            .entry(a.as_str())
            .or_insert_with(|| Hypervector::zeros(space.dim()))
            .add_assign(&base[b])
            .expect("same space");
        memories
            .entry(b.as_str())
            .or_insert_with(|| Hypervector::zeros(space.dim()))
            .add_assign(&base[a])
            .expect("same space");
    }
    let mut out = Hypervector::zeros(space.dim());
    for (id, m) in &memories {
        let mut term = base[*id].clone();
        term.bind_assign(m).expect("same space");
        out.add_assign(&term).expect("same space");
    }
    Ok(out.scaled(1.0 / g.nodes.len().max(1) as f64))
}

/// Decodes every unordered pair `i < j` (in id order) whose unbinding
/// similarity exceeds `tau`.
pub fn graphd_decode(e_g: &Hypervector, ids: &[String], space: &HvSpace, tau: f64) -> Vec<(String, String)> {
    let mut sorted: Vec<String> = ids.to_vec();
    sorted.sort();
    sorted.dedup();
    let base = base_table(&sorted, space);
    (0..sorted.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut unbound = e_g.clone();
            unbound.bind_assign(&base[&sorted[i]]).expect("same space");
            let sorted = &sorted;
            let base = &base;
            (i + 1..sorted.len()).filter_map(move |j| {
                let s = similarity(&unbound, &base[&sorted[j]]).expect("same space");
                (s > tau).then(|| (sorted[i].clone(), sorted[j].clone()))
            })
        })
        .collect()
}

/// Directed variant: an edge `a -> b` contributes `E_a ⊗ ρ(E_b)`.
pub fn graphd_encode_directed(g: &SimpleGraph, space: &HvSpace) -> Result<Hypervector, SimpleGraphError> {
    g.validate()?;
    let base = base_table(&g.nodes, space);
    let mut out = Hypervector::zeros(space.dim());
    for (a, b) in &g.edges {
        let mut term = space.permute(&base[b], 1).expect("same space");
        term.bind_assign(&base[a]).expect("same space");
        out.add_assign(&term).expect("same space");
    }
    Ok(out.scaled(1.0 / g.nodes.len().max(1) as f64))
}

/// Decodes ordered pairs `a -> b` of the directed encoding. Each true edge
/// contributes `1/|V|`, so `tau` should be about half of that.
pub fn graphd_decode_directed(e_g: &Hypervector, ids: &[String], space: &HvSpace, tau: f64) -> Vec<(String, String)> {
    let mut sorted: Vec<String> = ids.to_vec();
    sorted.sort();
    sorted.dedup();
    let base = base_table(&sorted, space);
    let permuted: BTreeMap<&str, Hypervector> = sorted
        .iter()
        .map(|id| (id.as_str(), space.permute(&base[id], 1).expect("same space")))
        .collect();
    sorted
        .par_iter()
        .flat_map_iter(|a| {
            let mut unbound = e_g.clone();
            unbound.bind_assign(&base[a]).expect("same space");
            let sorted = &sorted;
            let permuted = &permuted;
            sorted.iter().filter(move |b| *b != a).filter_map(move |b| {
                let s = similarity(&unbound, &permuted[b.as_str()]).expect("same space");
                (s > tau).then(|| (a.clone(), b.clone()))
            })
        })
        .collect()
}

/// Precision, recall and F1 of a decoded edge set against the truth,
/// treating edges as unordered.
pub fn decode_f1(truth: &SimpleGraph, decoded: &[(String, String)]) -> (f64, f64, f64) {
    let t = truth.undirected_edge_set();
    let d: BTreeSet<_> = decoded.iter().map(|(a, b)| key(a, b)).collect();
    crate::synth::prf(d.intersection(&t).count(), d.len(), t.len())
}
