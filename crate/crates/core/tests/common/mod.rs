//! Test-only oracles: random graphs and dense linear algebra built straight
//! from the adjacency, independent of the sparse operator.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regomax::aggregate::EditionComponents;
use regomax::{DenseMatrix, DirectedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph with about `mean_degree` out-links per node and a fraction
/// of dangling nodes.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    n: usize,
    mean_degree: f64,
    dangling_fraction: f64,
) -> DirectedGraph {
    let mut edges = Vec::new();
    for src in 0..n {
        if rng.gen_bool(dangling_fraction) {
            continue;
        }
        let degree = 1 + rng.gen_range(0..(2.0 * mean_degree) as usize);
        for _ in 0..degree {
            let dst = rng.gen_range(0..n);
            if dst != src {
                edges.push((src, dst));
            }
        }
    }
    DirectedGraph::from_edges(n, edges).unwrap()
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize, n_r: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(n_r);
    all
}

/// Dense Google matrix from the 0/1 adjacency.
pub fn dense_google(g: &DirectedGraph, alpha: f64) -> DMatrix<f64> {
    let n = g.node_count();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (src, dst) in g.edges() {
        a[(dst, src)] = 1.0;
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let col_sum: f64 = a.column(j).sum();
        for i in 0..n {
            let s = if col_sum > 0.0 {
                a[(i, j)] / col_sum
            } else {
                1.0 / n as f64
            };
            m[(i, j)] = alpha * s + (1.0 - alpha) / n as f64;
        }
    }
    m
}

/// Stationary vector of a dense stochastic matrix by direct solve of
/// `(1 − G) P = 0`, `Σ P = 1`.
pub fn dense_stationary(g: &DMatrix<f64>) -> Vec<f64> {
    let n = g.nrows();
    let mut system = DMatrix::<f64>::identity(n, n) - g;
    for j in 0..n {
        system[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let p = system.lu().solve(&rhs).expect("singular system");
    p.iter().copied().collect()
}

pub fn complement(n: usize, subset: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !subset.contains(i)).collect()
}

pub fn block(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| g[(rows[i], cols[j])])
}

/// `G_rr + G_rs (1 − G_ss)⁻¹ G_sr` by dense inversion.
pub fn dense_reduced(g: &DMatrix<f64>, subset: &[usize]) -> DMatrix<f64> {
    let s = complement(g.nrows(), subset);
    let g_rr = block(g, subset, subset);
    if s.is_empty() {
        return g_rr;
    }
    let g_rs = block(g, subset, &s);
    let g_sr = block(g, &s, subset);
    let g_ss = block(g, &s, &s);
    let resolvent = (DMatrix::<f64>::identity(s.len(), s.len()) - g_ss)
        .try_inverse()
        .expect("1 - G_ss singular");
    g_rr + g_rs * resolvent * g_sr
}

/// Dominant (largest real part) eigenvalue of the dense `G_ss` block.
pub fn dense_lambda_c(g: &DMatrix<f64>, subset: &[usize]) -> f64 {
    let s = complement(g.nrows(), subset);
    let g_ss = block(g, &s, &s);
    g_ss.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn argsort_desc(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).unwrap().then(a.cmp(&b)));
    idx
}

pub const FRIENDSHIP_FLOOR: f64 = 0.01;

/// Eight nodes, groups A = {0, 2, 3, 6} and B = {1, 4, 5, 7}, leaders 0 and 1,
/// two friends per node. Column `s` lists `(target, weight)` overrides; every
/// other off-diagonal entry is 0.02.
pub fn friendship_fixture() -> (DenseMatrix, DenseMatrix, Vec<String>, Vec<String>) {
    let columns: [&[(usize, f64)]; 8] = [
        &[(0, 0.9), (4, 0.30), (2, 0.20)],
        &[(4, 0.30), (5, 0.25)],
        &[(6, 0.50), (7, 0.20)],
        &[(0, 0.50), (1, 0.30)],
        &[(3, 0.40), (6, 0.40)],
        &[(6, 0.30), (0, 0.30)],
        &[(7, 0.40), (3, 0.40)],
        &[(1, 0.60), (0, 0.10)],
    ];
    let mut eff = DenseMatrix::from_element(8, 8, 0.02);
    for (s, col) in columns.iter().enumerate() {
        for &(t, w) in col.iter() {
            eff[(t, s)] = w;
        }
    }
    let mut g_rr = DenseMatrix::from_element(8, 8, FRIENDSHIP_FLOOR);
    for (s, t) in [(0, 2), (1, 4), (2, 6), (4, 3), (6, 7)] {
        g_rr[(t, s)] = 0.2;
    }
    let names = (0..8).map(|k| format!("v{k}")).collect();
    let groups = ["A", "B", "A", "A", "B", "B", "A", "B"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    (eff, g_rr, names, groups)
}

/// Expected `(node, level, parent)` placement of the friendship fixture with
/// leaders 0 and 1 and two friends per node.
pub const FRIENDSHIP_PLACEMENT: [(usize, usize, Option<usize>); 8] = [
    (0, 1, None),
    (1, 1, None),
    // 4 is claimed by 0 first but attaches to 1, its own group
    (4, 2, Some(1)),
    (2, 2, Some(0)),
    (5, 2, Some(1)),
    // no group-A claimant for 3: earliest claimant 4
    (3, 3, Some(4)),
    // claimed by 4, 2 and 5: group-A claimant 2
    (6, 3, Some(2)),
    (7, 3, Some(2)),
];

/// Expected `(source, target, origin_level, hidden)` edges of the fixture.
pub const FRIENDSHIP_EDGES: [(usize, usize, usize, bool); 16] = [
    (0, 4, 1, true),
    (0, 2, 1, false),
    (1, 4, 1, false),
    (1, 5, 1, true),
    (4, 3, 2, false),
    (4, 6, 2, true),
    (2, 6, 2, false),
    (2, 7, 2, true),
    (5, 0, 2, true),
    (5, 6, 2, true),
    (3, 0, 3, true),
    (3, 1, 3, true),
    (6, 3, 3, true),
    (6, 7, 3, false),
    (7, 1, 3, true),
    (7, 0, 3, true),
];

/// Random non-negative components whose sum is column-stochastic.
pub fn random_edition(rng: &mut ChaCha8Rng, edition: &str, n: usize) -> EditionComponents {
    let mut parts: Vec<DenseMatrix> = (0..3)
        .map(|_| DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(0.0..1.0)))
        .collect();
    for j in 0..n {
        let total: f64 = parts.iter().map(|m| m.column(j).sum()).sum();
        for m in parts.iter_mut() {
            m.column_mut(j).iter_mut().for_each(|x| *x /= total);
        }
    }
    let presence = (0..n).map(|_| rng.gen_bool(0.7)).collect();
    let g_qr = parts.pop().unwrap();
    let g_pr = parts.pop().unwrap();
    let g_rr = parts.pop().unwrap();
    EditionComponents {
        edition: edition.into(),
        g_rr,
        g_pr,
        g_qr,
        presence,
    }
}

/// Both absent-entity rules applied entry by entry, then the mean.
#[allow(clippy::needless_range_loop)]
pub fn reference_average(editions: &[EditionComponents]) -> DenseMatrix {
    let n = editions[0].presence.len();
    let mut sum = DenseMatrix::zeros(n, n);
    for e in editions {
        for j in 0..n {
            if !e.presence[j] {
                for i in 0..n {
                    sum[(i, j)] += 1.0 / n as f64;
                }
                continue;
            }
            let mut kept = vec![0.0; n];
            let mut removed = 0.0;
            for i in 0..n {
                let v = e.g_rr[(i, j)] + e.g_pr[(i, j)] + e.g_qr[(i, j)];
                if e.presence[i] {
                    kept[i] = v;
                } else {
                    removed += v;
                }
            }
            let total: f64 = kept.iter().sum();
            for (i, k) in kept.iter().enumerate() {
                sum[(i, j)] += if removed != 0.0 { k / total } else { *k };
            }
        }
    }
    sum / editions.len() as f64
}
