mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;
use regomax::google::{pagerank_from, ranks_of};
use regomax::{
    cheirank, overlap_curve, pagerank, two_d_rank, DirectedGraph, GoogleOperator, IterationParams,
};

#[test]
fn pagerank_matches_dense_solve() {
    let mut rng = rng(1);
    for _ in 0..20 {
        let n = rng.gen_range(20..=200);
        let g = random_graph(&mut rng, n, 5.0, 0.1);
        let op = GoogleOperator::new(&g, 0.85).unwrap();
        let pr = pagerank(&op, IterationParams::default());
        assert!(pr.converged);
        let oracle = dense_stationary(&dense_google(&g, 0.85));
        assert!(l1(&pr.probabilities, &oracle) < 1e-8);
    }
}

#[test]
fn cheirank_matches_dense_transposed_solve() {
    let mut rng = rng(2);
    let g = random_graph(&mut rng, 200, 5.0, 0.1);
    // G* from the transposed adjacency, built without the sparse inverter.
    let edges: Vec<(usize, usize)> = g.edges().map(|(s, t)| (t, s)).collect();
    let transposed = DirectedGraph::from_edges(200, edges).unwrap();
    let oracle = dense_stationary(&dense_google(&transposed, 0.85));
    let cr = cheirank(&g, 0.85, IterationParams::default()).unwrap();
    assert!(l1(&cr.probabilities, &oracle) < 1e-8);
}

#[test]
fn inverted_star() {
    let inward = DirectedGraph::from_edges(10, (1..10).map(|i| (i, 0))).unwrap();
    let outward = DirectedGraph::from_edges(10, (1..10).map(|i| (0, i))).unwrap();
    let cr = cheirank(&inward, 0.85, IterationParams::default()).unwrap();
    let pr = pagerank(
        &GoogleOperator::new(&outward, 0.85).unwrap(),
        IterationParams::default(),
    );
    assert_eq!(cr.probabilities, pr.probabilities);
}

#[test]
fn materialized_operator_is_column_stochastic() {
    let mut rng = rng(3);
    for n in [1, 2, 7, 50] {
        let g = random_graph(&mut rng, n, 3.0, 0.2);
        let op = GoogleOperator::new(&g, 0.85).unwrap();
        let dense = dense_google(&g, 0.85);
        for j in 0..n {
            let col = op.column(j);
            let sum: f64 = col.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            for (i, x) in col.iter().enumerate() {
                assert!((x - dense[(i, j)]).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn fixed_point_residual_and_normalization() {
    let mut rng = rng(5);
    let g = random_graph(&mut rng, 150, 5.0, 0.1);
    let op = GoogleOperator::new(&g, 0.85).unwrap();
    let params = IterationParams::new(1e-10, 1000).unwrap();
    let pr = pagerank(&op, params);
    let next = op.apply(&pr.probabilities).unwrap();
    assert!(l1(&next, &pr.probabilities) < 1e-10);
    assert!((pr.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for w in pr.ordering.windows(2) {
        let (a, b) = (pr.probabilities[w[0]], pr.probabilities[w[1]]);
        assert!(a > b || (a == b && w[0] < w[1]));
    }
}

#[test]
fn start_scale_does_not_change_ordering() {
    let mut rng = rng(6);
    let g = random_graph(&mut rng, 120, 4.0, 0.1);
    let op = GoogleOperator::new(&g, 0.85).unwrap();
    let base = pagerank(&op, IterationParams::default());
    let start: Vec<f64> = (0..120).map(|_| rng.gen_range(0.1..1.0)).collect();
    let scaled: Vec<f64> = start.iter().map(|x| x * 37.5).collect();
    let a = pagerank_from(&op, &start, IterationParams::default()).unwrap();
    let b = pagerank_from(&op, &scaled, IterationParams::default()).unwrap();
    assert_eq!(a.ordering, b.ordering);
    assert_eq!(a.ordering, base.ordering);
}

#[test]
fn unconverged_result_is_flagged() {
    let g = DirectedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
    let op = GoogleOperator::new(&g, 0.85).unwrap();
    let pr = pagerank(&op, IterationParams::new(1e-12, 2).unwrap());
    assert!(!pr.converged);
    assert_eq!(pr.iterations, 2);
    assert!(pr.require_converged("pagerank").is_err());
}

/// Frame scan over every cell of the `(K, K*)` plane.
fn brute_force_2drank(k: &[usize], k_star: &[usize]) -> Vec<usize> {
    let n = k.len();
    let rank = ranks_of(k);
    let rank_star = ranks_of(k_star);
    let mut out: Vec<usize> = Vec::new();
    for frame in 1..=n {
        let mut by_chei: Vec<usize> = (0..n)
            .filter(|&v| rank_star[v] == frame && rank[v] <= frame)
            .collect();
        by_chei.sort_by_key(|&v| rank[v]);
        let mut by_page: Vec<usize> = (0..n)
            .filter(|&v| rank[v] == frame && rank_star[v] <= frame)
            .collect();
        by_page.sort_by_key(|&v| rank_star[v]);
        for v in by_chei.into_iter().chain(by_page) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

#[test]
fn two_d_rank_matches_brute_force() {
    let mut rng = rng(8);
    for _ in 0..200 {
        let mut k: Vec<usize> = (0..6).collect();
        let mut k_star = k.clone();
        k.shuffle(&mut rng);
        k_star.shuffle(&mut rng);
        assert_eq!(
            two_d_rank(&k, &k_star).unwrap(),
            brute_force_2drank(&k, &k_star)
        );
    }
}

#[test]
fn two_d_rank_on_real_orderings() {
    let mut rng = rng(10);
    let g = random_graph(&mut rng, 300, 5.0, 0.1);
    let pr = pagerank(
        &GoogleOperator::new(&g, 0.85).unwrap(),
        IterationParams::default(),
    );
    let cr = cheirank(&g, 0.85, IterationParams::default()).unwrap();
    let k2 = two_d_rank(&pr.ordering, &cr.ordering).unwrap();
    assert_eq!(k2, brute_force_2drank(&pr.ordering, &cr.ordering));
    let distinct: HashSet<_> = k2.iter().collect();
    assert_eq!(distinct.len(), 300);
}

proptest! {
    #[test]
    fn two_d_rank_of_identical_orderings_is_identity(perm in Just((0..12).collect::<Vec<usize>>()).prop_shuffle()) {
        prop_assert_eq!(two_d_rank(&perm, &perm).unwrap(), perm);
    }

    #[test]
    fn overlap_identity_and_disjoint(n in 1usize..40) {
        let a: Vec<u32> = (0..n as u32).collect();
        let b: Vec<u32> = (100..100 + n as u32).collect();
        prop_assert!(overlap_curve(&a, &a, n).unwrap().iter().all(|&x| x == 1.0));
        prop_assert!(overlap_curve(&a, &b, n).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn overlap_matches_set_intersection(
        a in Just((0..20).collect::<Vec<u32>>()).prop_shuffle(),
        b in Just((0..20).collect::<Vec<u32>>()).prop_shuffle(),
    ) {
        let eta = overlap_curve(&a, &b, 20).unwrap();
        for j in 1..=20 {
            let sa: HashSet<_> = a[..j].iter().collect();
            let common = b[..j].iter().filter(|x| sa.contains(x)).count();
            prop_assert_eq!(eta[j - 1], common as f64 / j as f64);
        }
        prop_assert_eq!(eta[19], 1.0);
    }
}

#[test]
fn overlap_hand_case() {
    let eta = overlap_curve(&["a", "b", "c", "d"], &["b", "a", "d", "e"], 4).unwrap();
    assert_eq!(eta, vec![0.0, 1.0, 2.0 / 3.0, 0.75]);
    assert!(overlap_curve(&["a"], &["a", "b"], 2).is_err());
}
