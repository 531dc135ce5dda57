use std::collections::{BTreeMap, BTreeSet};

use lclr_core::gadget_bd::{
    auto_edge_coloring, classify_vertices, contract_db, gadget_bd, is_correctly_gadgeted_ball, lift_b_to_d, lift_d_to_b,
    max_ball_edges, max_ball_vertices, DConstants,
};
use lclr_core::graph::{edge_key, gen, EdgeKey, VertexClass};
use lclr_core::{ball, gball, gdist, Error, GDist, LabeledGraph, Label, VertexId};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cubic_family() -> Vec<LabeledGraph> {
    vec![gen::complete(4), gen::prism(), gen::complete_bipartite(3, 3), gen::cube(), gen::petersen()]
}

/// A cubic graph from the family with its ids scattered over a sparse range.
fn shuffled_cubic(pick: usize, seed: u64) -> LabeledGraph {
    let g = cubic_family().swap_remove(pick % 5);
    let mut ids: Vec<VertexId> = (0..g.vertex_count() as u32).map(|i| 3 * i + 5).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    g.relabel_vertices(|v| ids[v as usize])
}

/// Plain BFS, independent of the library's distance code.
fn bfs(g: &LabeledGraph, s: VertexId) -> BTreeMap<VertexId, u32> {
    let mut dist = BTreeMap::from([(s, 0)]);
    let mut frontier = vec![s];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for v in frontier {
            for u in g.neighbors(v) {
                if !dist.contains_key(&u) {
                    dist.insert(u, dist[&v] + 1);
                    next.push(u);
                }
            }
        }
        frontier = next;
    }
    dist
}

fn edges_close(g: &LabeledGraph, e: EdgeKey, f: EdgeKey, bound: u32) -> bool {
    [e.0, e.1].iter().any(|&a| {
        let d = bfs(g, a);
        [f.0, f.1].iter().any(|b| d[b] < bound)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn auto_coloring_separates_close_edges(pick in 0usize..5, seed in any::<u64>(), r in 1u32..=2) {
        let g = shuffled_cubic(pick, seed);
        let x = auto_edge_coloring(&g, r).unwrap();
        prop_assert_eq!(x.len(), g.edge_count());
        let edges: Vec<EdgeKey> = g.edges().collect();
        for (i, &e) in edges.iter().enumerate() {
            prop_assert!(x[&e] >= 1);
            for &f in &edges[i + 1..] {
                if edges_close(&g, e, f, 2 * r) {
                    prop_assert_ne!(x[&e], x[&f], "{:?} {:?}", e, f);
                }
            }
        }
    }

    #[test]
    fn gadgeting_and_contraction(pick in 0usize..5, seed in any::<u64>()) {
        let g = shuffled_cubic(pick, seed);
        let x = auto_edge_coloring(&g, 1).unwrap();
        let gg = gadget_bd(&g, &x, 1).unwrap();
        let total: u32 = x.values().sum();
        prop_assert_eq!(gg.graph.vertex_count(), g.vertex_count() + 6 * total as usize);
        prop_assert!(gg.graph.is_regular(3));
        let originals: BTreeSet<VertexId> = gg.originals().collect();
        prop_assert_eq!(&originals, &g.vertices().collect::<BTreeSet<_>>());
        let tri = classify_vertices(&gg.graph);
        for (v, c) in &gg.classes {
            prop_assert_eq!(!tri[v], *c == VertexClass::Original);
        }
        for e in &gg.expanded {
            prop_assert_eq!(e.length, x[&edge_key(e.u, e.v)]);
            prop_assert_eq!(e.vertices.len() as u32, 6 * e.length);
        }
        let c = contract_db(&gg.graph);
        prop_assert_eq!(c.reversed, 0);
        prop_assert_eq!(c.contracted, g.edge_count());
        prop_assert_eq!(&c.coloring, &x);
        prop_assert_eq!(c.graph.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn gadget_distance_matches_source_distance(pick in 0usize..5, seed in any::<u64>()) {
        let g = shuffled_cubic(pick, seed);
        let gg = gadget_bd(&g, &auto_edge_coloring(&g, 1).unwrap(), 1).unwrap();
        for u in g.vertices() {
            let d = bfs(&g, u);
            for v in g.vertices() {
                prop_assert_eq!(gdist(&gg.graph, u, v).unwrap(), GDist::Finite(2 * d[&v]));
            }
        }
    }
}

#[test]
fn gballs_around_originals_are_correctly_gadgeted() {
    for g in cubic_family() {
        let gg = gadget_bd(&g, &auto_edge_coloring(&g, 1).unwrap(), 1).unwrap();
        for o in g.vertices() {
            assert!(is_correctly_gadgeted_ball(&gball(&gg.graph, o, 1).unwrap()));
        }
        for v in g.vertices() {
            assert!(!is_correctly_gadgeted_ball(&ball(&g, v, 1).unwrap()));
        }
    }
}

#[test]
fn equal_chain_lengths_are_rejected() {
    let g = gen::complete(4);
    let x: BTreeMap<EdgeKey, u32> = g.edges().map(|e| (e, 1)).collect();
    assert!(matches!(gadget_bd(&g, &x, 1), Err(Error::InvalidColoring(_))));
    assert!(gadget_bd(&gen::cycle(4), &BTreeMap::new(), 1).is_err());
}

#[test]
fn constants_follow_the_ball_bounds() {
    for r in 1..=6u32 {
        let d = DConstants::new(r).unwrap();
        assert_eq!(d.k, max_ball_edges(r) + 1);
        assert_eq!(d.r_d, (4 * d.k + 1) * r as u128 + 1);
        assert_eq!(2 * max_ball_edges(r), 3 * max_ball_vertices(r));
    }
    assert_eq!(max_ball_vertices(1), 4);
    assert_eq!(max_ball_vertices(2), 10);
    assert_eq!(DConstants::new(1).unwrap().r_d, 30);
    assert!(DConstants::new(0).is_err());
    assert!(DConstants::new(2).unwrap().r_d_u32().is_ok());
    assert!(DConstants::new(40).unwrap().r_d_u32().is_err());
}

#[test]
fn b_to_d_round_trip_and_color_checks() {
    let g = gen::prism();
    let gg = gadget_bd(&g, &auto_edge_coloring(&g, 1).unwrap(), 1).unwrap();
    let sigma_b: BTreeMap<VertexId, Label> = g.vertices().map(|v| (v, v as Label % 3 + 1)).collect();
    let chi: BTreeMap<VertexId, u64> = gg.graph.vertices().map(|v| (v, 7 * v as u64 + 2)).collect();
    let d = lift_b_to_d(&sigma_b, &chi, &gg, 30).unwrap();
    assert_eq!(d.len(), gg.graph.vertex_count());
    assert_eq!(lift_d_to_b(&d, &gg), sigma_b);

    let flat: BTreeMap<VertexId, u64> = gg.graph.vertices().map(|v| (v, v as u64 % 50)).collect();
    assert!(matches!(lift_b_to_d(&sigma_b, &flat, &gg, 30), Err(Error::InvalidColoring(_))));
    let mut partial = sigma_b.clone();
    partial.remove(&0);
    assert!(matches!(lift_b_to_d(&partial, &chi, &gg, 30), Err(Error::MissingLabel(0))));
}
