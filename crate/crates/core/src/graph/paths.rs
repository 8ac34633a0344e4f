use std::collections::HashMap;

use super::LayeredGraph;

/// Enumeration refuses graphs whose product of layer sizes exceeds this.
pub const PATH_ENUMERATION_LIMIT: u128 = 1_000_000;

/// One node id per layer, ordered from layer 1 to the last layer.
pub type ReasoningPath = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("path enumeration would visit up to {bound} paths (limit {PATH_ENUMERATION_LIMIT}); use the DP encoder instead")]
pub struct TooManyPaths {
    pub bound: u128,
}

/// All complete layer-1-to-last-layer paths, in lexicographic id order.
///
/// This is the exponential oracle; it exists to check the DP encoder.
pub fn enumerate_paths(g: &LayeredGraph) -> Result<Vec<ReasoningPath>, TooManyPaths> {
    let layers = g.layers();
    let bound = layers
        .iter()
        .fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128));
    if bound > PATH_ENUMERATION_LIMIT {
        return Err(TooManyPaths { bound });
    }
    let succ = g.out_neighbors();
    let mut out = Vec::new();
    let Some(first) = layers.first() else {
        return Ok(out);
    };
    let mut stack: Vec<&str> = Vec::with_capacity(g.num_layers);
    fn walk<'a>(
        node: &'a str,
        depth: usize,
        num_layers: usize,
        succ: &std::collections::BTreeMap<&'a str, Vec<&'a str>>,
        stack: &mut Vec<&'a str>,
        out: &mut Vec<ReasoningPath>,
    ) {
        stack.push(node);
        if depth == num_layers {
            out.push(stack.iter().map(|s| s.to_string()).collect());
        } else if let Some(next) = succ.get(node) {
            for n in next {
                walk(n, depth + 1, num_layers, succ, stack, out);
            }
        }
        stack.pop();
    }
    for node in first {
        walk(&node.id, 1, g.num_layers, &succ, &mut stack, &mut out);
    }
    Ok(out)
}

/// Number of complete paths by integer DP over in-edges.
pub fn count_paths(g: &LayeredGraph) -> u128 {
    let layers = g.layers();
    let preds = g.in_neighbors();
    let mut counts: HashMap<&str, u128> = HashMap::new();
    for (depth, layer) in layers.iter().enumerate() {
        for node in layer {
            let c = if depth == 0 {
                1
            } else {
                preds
                    .get(node.id.as_str())
                    .map(|ps| ps.iter().map(|p| counts.get(p).copied().unwrap_or(0)).sum())
                    .unwrap_or(0)
            };
            counts.insert(&node.id, c);
        }
    }
    layers
        .last()
        .map(|l| l.iter().map(|n| counts[n.id.as_str()]).sum())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;

    fn full(widths: &[usize]) -> LayeredGraph {
        let mut g = LayeredGraph::new(widths.len(), 1);
        for (i, &w) in widths.iter().enumerate() {
            for k in 0..w {
                g.nodes.push(Node::new(format!("{}{}", (b'a' + i as u8) as char, k), i + 1, vec![0.0]));
            }
        }
        g.edges = g.candidate_edges();
        g
    }

    #[test]
    fn chain_has_one_path() {
        let g = full(&[1, 1, 1]);
        assert_eq!(enumerate_paths(&g).unwrap(), vec![vec!["a0", "b0", "c0"]]);
        assert_eq!(count_paths(&g), 1);
    }

    #[test]
    fn full_two_by_two_by_two_has_eight() {
        let g = full(&[2, 2, 2]);
        let paths = enumerate_paths(&g).unwrap();
        assert_eq!(paths.len(), 8);
        let mut sorted = paths.clone();
        sorted.sort();
        assert_eq!(paths, sorted);
        assert_eq!(count_paths(&g), 8);
    }

    #[test]
    fn isolated_middle_node_is_on_no_path() {
        let mut g = full(&[1, 1, 1]);
        g.nodes.push(Node::new("b9", 2, vec![0.0]));
        let paths = enumerate_paths(&g).unwrap();
        assert_eq!(paths.len(), 1);
        assert!(paths.iter().all(|p| !p.contains(&"b9".to_string())));
    }

    #[test]
    fn guard_trips_on_large_graphs() {
        let mut g = LayeredGraph::new(3, 1);
        for layer in 1..=3 {
            for k in 0..101 {
                g.nodes.push(Node::new(format!("{layer}_{k}"), layer, vec![0.0]));
            }
        }
        assert!(enumerate_paths(&g).is_err());
    }
}
