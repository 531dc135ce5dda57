//! Inputs shared by the benchmarks.

use lclr_core::{LabeledGraph, VertexId};

/// The circular ladder on `2n` vertices, labeled by index mod 3.
pub fn circular_ladder(n: u32) -> LabeledGraph {
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        edges.extend([(i, j), (n + i, n + j), (i, n + i)]);
    }
    let mut g = LabeledGraph::from_edges(2 * n, &edges).expect("ladder edges are simple for n >= 3");
    for v in 0..2 * n {
        g.set_node_label(v, u64::from(v % 3)).expect("vertex exists");
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_is_cubic() {
        let g = circular_ladder(5);
        assert_eq!(g.vertex_count(), 10);
        assert!(g.is_regular(3));
    }
}
