use std::collections::BTreeMap;

use crate::encoder::{EncodeError, HvTables};
use crate::graph::{LayeredGraph, Node};
use crate::hdc::{normalize, Hypervector};

use super::RefineError;

/// Forward and backward context under full adjacent-layer connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMessages {
    pub forward: BTreeMap<String, Hypervector>,
    pub backward: BTreeMap<String, Hypervector>,
}

/// Mean over `layer` of `Norm(L ⊗ msg(t) ⊗ H(t))`.
fn dense_step(
    layer: &[&Node],
    layer_hv: &Hypervector,
    msgs: &BTreeMap<String, Hypervector>,
    t: &HvTables,
) -> Result<Hypervector, EncodeError> {
    let mut acc = Hypervector::zeros(t.dim());
    for node in layer {
        let mut term = layer_hv.clone();
        term.bind_assign(&msgs[&node.id])?;
        term.bind_assign(t.node(&node.id)?)?;
        acc.add_assign(&normalize(&term))?;
    }
    Ok(acc.scaled(1.0 / layer.len() as f64))
}

/// Computes forward messages from layer 1 and backward messages from the
/// last layer, treating every adjacent layer pair as fully connected.
///
/// The actual edge set of `g` is ignored. Because every node of a layer has
/// the same dense predecessors, all nodes of one layer share one message.
pub fn dense_messages(g: &LayeredGraph, t: &HvTables) -> Result<DenseMessages, RefineError> {
    t.check_against(g)?;
    let layers = g.layers();
    if let Some(i) = layers.iter().position(Vec::is_empty) {
        return Err(RefineError::EmptyLayer(i + 1));
    }
    let dim = t.dim();
    let num_layers = g.num_layers;

    let mut forward = BTreeMap::new();
    for node in &layers[0] {
        forward.insert(node.id.clone(), Hypervector::ones(dim));
    }
    for d in 2..=num_layers {
        let msg = dense_step(&layers[d - 2], t.layer(d - 1), &forward, t)?;
        for node in &layers[d - 1] {
            forward.insert(node.id.clone(), msg.clone());
        }
    }

    let mut backward = BTreeMap::new();
    for node in &layers[num_layers - 1] {
        backward.insert(node.id.clone(), Hypervector::ones(dim));
    }
    for d in (1..num_layers).rev() {
        let msg = dense_step(&layers[d], t.layer(d + 1), &backward, t)?;
        for node in &layers[d - 1] {
            backward.insert(node.id.clone(), msg.clone());
        }
    }
    Ok(DenseMessages { forward, backward })
}
