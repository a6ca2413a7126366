mod common;

use std::collections::HashSet;

use common::*;
use regomax::friendship::{
    build_network, effective_matrix, network_of_reduced, DirectLinks, ExportFormat,
    FriendshipNetwork,
};
use regomax::{compute_components, DenseMatrix, NodeSubset, ReductionParams};

fn build(
    eff: &DenseMatrix,
    g_rr: &DenseMatrix,
    names: &[String],
    groups: &[String],
) -> FriendshipNetwork {
    let direct = DirectLinks {
        g_rr,
        floor: FRIENDSHIP_FLOOR,
    };
    build_network(eff, Some(direct), names, groups, &[0, 1], 2).unwrap()
}

#[test]
fn eight_node_manual_trace() {
    let (eff, g_rr, names, groups) = friendship_fixture();
    let net = build(&eff, &g_rr, &names, &groups);

    let placed: Vec<(usize, usize, Option<usize>)> = net
        .nodes
        .iter()
        .map(|n| (n.index, n.level, n.parent))
        .collect();
    assert_eq!(placed, FRIENDSHIP_PLACEMENT);
    assert!(net.nodes[..2].iter().all(|n| n.leader));
    assert!(net.nodes[2..].iter().all(|n| !n.leader));

    let edges: Vec<(usize, usize, usize, bool)> = net
        .edges
        .iter()
        .map(|e| (e.source, e.target, e.origin_level, e.hidden))
        .collect();
    assert_eq!(edges, FRIENDSHIP_EDGES);
    assert_eq!(net.edges[0].weight, 0.30);
}

#[test]
fn json_is_byte_identical_and_round_trips() {
    let (eff, g_rr, names, groups) = friendship_fixture();
    let a = build(&eff, &g_rr, &names, &groups).to_json().unwrap();
    let b = build(&eff, &g_rr, &names, &groups).to_json().unwrap();
    assert_eq!(a, b);
    let back = FriendshipNetwork::from_json(&a).unwrap();
    assert_eq!(back, build(&eff, &g_rr, &names, &groups));
    assert!(FriendshipNetwork::from_json(&a.replace("friendship/1", "friendship/9")).is_err());
}

#[test]
fn dot_edge_styles_follow_levels() {
    let (eff, g_rr, names, groups) = friendship_fixture();
    let mut out = Vec::new();
    build(&eff, &g_rr, &names, &groups)
        .export(ExportFormat::Dot, &mut out)
        .unwrap();
    let dot = String::from_utf8(out).unwrap();
    assert!(dot.starts_with("digraph friendship {\n"));
    let line = |src: &str, dst: &str| {
        dot.lines()
            .find(|l| l.contains(&format!("\"{src}\" -> \"{dst}\"")))
            .unwrap()
            .to_owned()
    };
    assert!(line("v0", "v2").contains("style=solid") && line("v0", "v2").contains("color=black"));
    assert!(line("v4", "v6").contains("style=dashed") && line("v4", "v6").contains("color=red"));
    assert!(line("v6", "v7").contains("style=dotted"));
}

fn reduced(seed: u64) -> regomax::ReducedGoogleMatrix {
    let mut rng = rng(seed);
    let g = random_graph(&mut rng, 150, 4.0, 0.1);
    let subset = random_subset(&mut rng, 150, 16);
    compute_components(
        &g,
        &NodeSubset::from_indices(subset, 150).unwrap(),
        ReductionParams::default(),
    )
    .unwrap()
}

#[test]
fn effective_matrix_is_direct_plus_offdiagonal_hidden() {
    let m = reduced(90);
    let eff = effective_matrix(&m);
    for i in 0..m.n_r() {
        assert_eq!(eff[(i, i)], m.g_rr[(i, i)]);
        for j in 0..m.n_r() {
            let expected = m.g_rr[(i, j)] + if i == j { 0.0 } else { m.g_qr[(i, j)] };
            assert_eq!(eff[(i, j)], expected);
        }
    }
}

#[test]
fn network_invariants_on_reduced_matrices() {
    for seed in 91..96 {
        let m = reduced(seed);
        let n = m.n_r();
        let groups: Vec<String> = (0..n).map(|k| format!("g{}", k % 3)).collect();
        let leaders = [0, 5, 9];
        let net = network_of_reduced(&m, &groups, &leaders, 4).unwrap();

        let mut seen = HashSet::new();
        assert!(net.nodes.iter().all(|node| seen.insert(node.index)));
        assert!(net.nodes.len() <= n);
        let level_of = |k: usize| net.nodes.iter().find(|x| x.index == k).unwrap().level;
        for node in &net.nodes {
            match node.parent {
                None => assert!(node.leader && node.level == 1),
                Some(p) => assert_eq!(node.level, level_of(p) + 1),
            }
            let out = net.edges.iter().filter(|e| e.source == node.index).count();
            assert_eq!(out, 4.min(n - 1));
        }
        let floor = m.teleport();
        for e in &net.edges {
            assert_ne!(e.source, e.target);
            assert_eq!(e.origin_level, level_of(e.source));
            assert_eq!(
                e.hidden,
                (m.g_rr[(e.target, e.source)] - floor).abs() <= 1e-15
            );
        }
        let again = network_of_reduced(&m, &groups, &leaders, 4).unwrap();
        assert_eq!(net.to_json().unwrap(), again.to_json().unwrap());
    }
}
