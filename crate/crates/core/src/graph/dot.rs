use std::fmt::Write;

use super::LayeredGraph;
use crate::refiner::EdgeScoreTable;

/// Widest pen used for the best-scoring edge.
const MAX_PENWIDTH: f64 = 8.0;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders the graph as a Graphviz digraph with one rank per layer.
///
/// With `scores`, every edge found in the table is labelled with its score
/// to four decimals and drawn with a pen width proportional to it.
pub fn emit_dot(g: &LayeredGraph, scores: Option<&EdgeScoreTable>) -> String {
    let mut out = String::new();
    out.push_str("digraph reasoning {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=box];\n");
    for (i, layer) in g.layers().iter().enumerate() {
        let _ = writeln!(out, "  subgraph layer_{} {{", i + 1);
        out.push_str("    rank=same;\n");
        for node in layer {
            let _ = writeln!(out, "    {} [label={}];", quote(&node.id), quote(&node.label));
        }
        out.push_str("  }\n");
    }
    let max_score = scores.map(|s| s.max_score()).unwrap_or(0.0);
    let mut edges = g.edges.clone();
    edges.sort();
    for (src, dst) in &edges {
        let _ = write!(out, "  {} -> {}", quote(src), quote(dst));
        match scores.and_then(|s| s.get(src, dst)) {
            Some(score) if max_score > 0.0 => {
                let _ = write!(
                    out,
                    " [label=\"{:.4}\", penwidth={:.3}]",
                    score,
                    MAX_PENWIDTH * score / max_score
                );
            }
            Some(score) => {
                let _ = write!(out, " [label=\"{score:.4}\"]");
            }
            None => {}
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}
