mod common;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use regomax::graph::{DuplicatePolicy, LoopPolicy};
use regomax::{load_edge_list, DirectedGraph, LoadOptions};

/// Reference loader: a set of distinct non-loop pairs and `1 + max id`.
fn reference(lines: &[(u32, u32)]) -> (usize, BTreeSet<(usize, usize)>) {
    let n = lines
        .iter()
        .map(|&(a, b)| a.max(b) as usize + 1)
        .max()
        .unwrap_or(0);
    let set = lines
        .iter()
        .filter(|(a, b)| a != b)
        .map(|&(a, b)| (a as usize, b as usize))
        .collect();
    (n, set)
}

fn to_text(lines: &[(u32, u32)]) -> String {
    let mut text = String::with_capacity(lines.len() * 12);
    for (a, b) in lines {
        writeln!(text, "{a}\t{b}").unwrap();
    }
    text
}

#[test]
fn million_lines_match_set_reference() {
    let mut rng = rng(42);
    let lines: Vec<(u32, u32)> = (0..1_000_000)
        .map(|_| (rng.gen_range(0..100_000), rng.gen_range(0..100_000)))
        .chain((0..20_000).map(|k| (k, k)))
        .chain((0..50_000).map(|k| (k, k + 1)))
        .chain((0..50_000).map(|k| (k, k + 1)))
        .collect();
    let (n, expected) = reference(&lines);
    let (g, report) = load_edge_list(to_text(&lines).as_bytes(), LoadOptions::default()).unwrap();
    assert_eq!(g.node_count(), n);
    assert_eq!(g.edge_count(), expected.len());
    let got: BTreeSet<(usize, usize)> = g.edges().collect();
    assert_eq!(got, expected);
    assert_eq!(report.edges_read, lines.len());
}

#[test]
fn invert_matches_dense_transpose() {
    let mut rng = rng(9);
    let g = random_graph(&mut rng, 500, 5.0, 0.1);
    let n = g.node_count();
    let mut adjacency = vec![false; n * n];
    for (s, t) in g.edges() {
        adjacency[s * n + t] = true;
    }
    let inv = g.invert();
    let mut transposed = vec![false; n * n];
    for (s, t) in inv.edges() {
        transposed[s * n + t] = true;
    }
    for s in 0..n {
        for t in 0..n {
            assert_eq!(transposed[s * n + t], adjacency[t * n + s]);
        }
    }
    assert_eq!(inv.edge_count(), g.edge_count());
}

#[test]
fn header_keeps_isolated_nodes() {
    let (g, _) = load_edge_list("#N=6\n0\t1\n".as_bytes(), LoadOptions::default()).unwrap();
    assert_eq!(g.node_count(), 6);
    assert!(g.is_dangling(5));
}

#[test]
fn strict_policies_reject() {
    let strict = LoadOptions {
        self_loops: LoopPolicy::Reject,
        duplicates: DuplicatePolicy::Reject,
        ..LoadOptions::default()
    };
    assert!(load_edge_list("0\t0\n".as_bytes(), strict).is_err());
    assert!(load_edge_list("0\t1\n0\t1\n".as_bytes(), strict).is_err());
}

#[test]
fn loading_is_thread_count_independent() {
    let mut rng = rng(4);
    let lines: Vec<(u32, u32)> = (0..20_000)
        .map(|_| (rng.gen_range(0..3000), rng.gen_range(0..3000)))
        .collect();
    let text = to_text(&lines);
    let load = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                load_edge_list(text.as_bytes(), LoadOptions::default())
                    .unwrap()
                    .0
            })
    };
    let one: Vec<_> = load(1).edges().collect();
    let four: Vec<_> = load(4).edges().collect();
    assert_eq!(one, four);
}

proptest! {
    #[test]
    fn loaded_graphs_are_well_formed(
        pairs in prop::collection::vec((0u32..40, 0u32..40), 0..200)
    ) {
        let (n, expected) = reference(&pairs);
        let (g, _) = load_edge_list(to_text(&pairs).as_bytes(), LoadOptions::default()).unwrap();
        prop_assert_eq!(g.node_count(), n);
        for node in 0..g.node_count() {
            let targets = g.targets(node);
            prop_assert!(targets.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(targets.iter().all(|&t| (t as usize) < n && t as usize != node));
        }
        let got: BTreeSet<_> = g.edges().collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn invert_is_an_involution(
        pairs in prop::collection::vec((0usize..30, 0usize..30), 0..150)
    ) {
        let g = DirectedGraph::from_edges(30, pairs.into_iter().filter(|(a, b)| a != b)).unwrap();
        let back = g.invert().invert();
        prop_assert_eq!(g.edges().collect::<Vec<_>>(), back.edges().collect::<Vec<_>>());
    }
}
