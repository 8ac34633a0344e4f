use serde_json::error::Category;
use thiserror::Error;

use super::{LayeredGraph, ValidationReport};

#[derive(Debug, Error)]
pub enum GraphIoError {
    #[error("malformed graph document: {0}")]
    Malformed(serde_json::Error),
    #[error("graph document does not match the schema: {0}")]
    Schema(serde_json::Error),
    #[error("graph failed validation: {0}")]
    Invalid(ValidationReport),
}

/// Parses and validates a graph document.
pub fn load_graph(bytes: &[u8]) -> Result<LayeredGraph, GraphIoError> {
    let graph: LayeredGraph = serde_json::from_slice(bytes).map_err(|e| match e.classify() {
        Category::Data => GraphIoError::Schema(e),
        _ => GraphIoError::Malformed(e),
    })?;
    let report = graph.validate();
    if report.is_ok() {
        Ok(graph)
    } else {
        Err(GraphIoError::Invalid(report))
    }
}

pub fn save_graph(graph: &LayeredGraph) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(graph).expect("graph serialization is infallible");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;

    fn sample() -> LayeredGraph {
        LayeredGraph {
            num_layers: 2,
            feature_dim: 3,
            nodes: vec![
                Node::new("a", 1, vec![0.1, -2.5, 1e-17]).with_label("mug on table"),
                Node::new("b", 2, vec![3.0, 0.0, -0.0]),
            ],
            edges: vec![("a".into(), "b".into())],
        }
    }

    #[test]
    fn roundtrip() {
        let g = sample();
        assert_eq!(load_graph(&save_graph(&g)).unwrap(), g);
    }

    #[test]
    fn missing_layer_count_is_a_schema_error() {
        let mut doc: serde_json::Value = serde_json::from_slice(&save_graph(&sample())).unwrap();
        doc.as_object_mut().unwrap().remove("num_layers");
        let bytes = serde_json::to_vec(&doc).unwrap();
        assert!(matches!(load_graph(&bytes), Err(GraphIoError::Schema(_))));
    }

    #[test]
    fn broken_json_is_malformed() {
        assert!(matches!(load_graph(b"{\"num_layers\": 2,"), Err(GraphIoError::Malformed(_))));
        assert!(matches!(load_graph(b"{]"), Err(GraphIoError::Malformed(_))));
    }

    #[test]
    fn feature_length_mismatch_fails_validation() {
        let mut g = sample();
        g.nodes[1].features.pop();
        let bytes = serde_json::to_vec(&g).unwrap();
        assert!(matches!(load_graph(&bytes), Err(GraphIoError::Invalid(_))));
    }
}
