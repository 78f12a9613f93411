use std::fmt::Write;

use super::{Wfsa, NEG_INF_THRESHOLD};

/// Renders the graph as a Graphviz digraph.
///
/// Arc labels read `(unit,pos):frame/weight`; a point-shaped `init` node
/// marks the start state and the final state is drawn as a double circle.
pub fn to_dot(wfsa: &Wfsa) -> String {
    let mut out = String::new();
    out.push_str("digraph wfsa {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle];\n");
    out.push_str("  init [shape=point, label=\"\"];\n");
    for s in 0..wfsa.num_states() {
        if s == wfsa.final_state() {
            writeln!(out, "  {s} [label=\"{s}\", shape=doublecircle];").unwrap();
        } else {
            writeln!(out, "  {s} [label=\"{s}\"];").unwrap();
        }
    }
    writeln!(out, "  init -> {};", wfsa.start()).unwrap();
    for arc in wfsa.arcs() {
        writeln!(
            out,
            "  {} -> {} [label=\"{}/{}\"];",
            arc.src,
            arc.dst,
            arc.label,
            format_weight(arc.weight)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn format_weight(w: f64) -> String {
    if w <= NEG_INF_THRESHOLD {
        "-inf".to_string()
    } else if w == 0.0 {
        // avoid printing -0.0000
        "0.0000".to_string()
    } else {
        format!("{w:.4}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsa::{Arc, ArcLabel, Symbol};

    #[test]
    fn renders_labels_and_weights() {
        let g = Wfsa::new(
            2,
            1,
            vec![
                Arc::new(0, 1, ArcLabel::at(Symbol::Blank, 0, 0), -0.25),
                Arc::new(0, 1, ArcLabel::at(Symbol::SkipFrame, 0, 0), f64::NEG_INFINITY),
            ],
        )
        .unwrap();
        let dot = to_dot(&g);
        assert!(dot.contains("0 -> 1 [label=\"(<b>,0):0/-0.2500\"];"));
        assert!(dot.contains("0 -> 1 [label=\"(<sf>,0):0/-inf\"];"));
        assert!(dot.contains("1 [label=\"1\", shape=doublecircle];"));
        assert_eq!(dot, to_dot(&g));
    }
}
