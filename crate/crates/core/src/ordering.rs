//! Combining and comparing rank orderings.

use std::collections::HashSet;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::google::ranks_of;

/// 2DRank ordering from a PageRank ordering `k` and a CheiRank ordering
/// `k_star` (both given as node-at-rank lists).
///
/// Square frames of size 1, 2, … are scanned in the `(K, K*)` plane. At frame
/// `s` the node with `K* = s` is appended first if its `K ≤ s`, then the node
/// with `K = s` if its `K* ≤ s`; nodes already appended are skipped.
pub fn two_d_rank(k: &[usize], k_star: &[usize]) -> Result<Vec<usize>> {
    let n = k.len();
    if k_star.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: k_star.len(),
        });
    }
    check_permutation(k)?;
    check_permutation(k_star)?;
    let rank = ranks_of(k);
    let rank_star = ranks_of(k_star);

    let mut placed = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for frame in 1..=n {
        let by_chei = k_star[frame - 1];
        if rank[by_chei] <= frame && !placed[by_chei] {
            placed[by_chei] = true;
            out.push(by_chei);
        }
        let by_page = k[frame - 1];
        if rank_star[by_page] <= frame && !placed[by_page] {
            placed[by_page] = true;
            out.push(by_page);
        }
    }
    Ok(out)
}

fn check_permutation(order: &[usize]) -> Result<()> {
    let n = order.len();
    let mut seen = vec![false; n];
    for &node in order {
        if node >= n {
            return Err(Error::IndexOutOfRange {
                index: node,
                node_count: n,
            });
        }
        if std::mem::replace(&mut seen[node], true) {
            return Err(Error::DuplicateEntry(node.to_string()));
        }
    }
    Ok(())
}

/// Overlap curve `η(j) = |top_j(a) ∩ top_j(b)| / j` for `j = 1..=j_max`.
pub fn overlap_curve<T: Eq + Hash + std::fmt::Debug>(
    a: &[T],
    b: &[T],
    j_max: usize,
) -> Result<Vec<f64>> {
    for list in [a, b] {
        if j_max > list.len() {
            return Err(Error::InvalidParameter(format!(
                "j_max = {j_max} exceeds list length {}",
                list.len()
            )));
        }
        let mut seen = HashSet::with_capacity(list.len());
        for item in list {
            if !seen.insert(item) {
                return Err(Error::DuplicateEntry(format!("{item:?}")));
            }
        }
    }
    let mut in_a = HashSet::with_capacity(j_max);
    let mut in_b = HashSet::with_capacity(j_max);
    let mut common = 0usize;
    let mut curve = Vec::with_capacity(j_max);
    for j in 0..j_max {
        in_a.insert(&a[j]);
        if in_b.contains(&a[j]) {
            common += 1;
        }
        in_b.insert(&b[j]);
        if in_a.contains(&b[j]) {
            common += 1;
        }
        curve.push(common as f64 / (j + 1) as f64);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_orderings() {
        let k = vec![3, 1, 0, 2, 4];
        assert_eq!(two_d_rank(&k, &k).unwrap(), k);
    }

    #[test]
    fn top_of_both_comes_first() {
        let k = vec![2, 0, 1];
        let k_star = vec![2, 1, 0];
        assert_eq!(two_d_rank(&k, &k_star).unwrap()[0], 2);
    }

    #[test]
    fn frame_sub_order() {
        // K:  node0=1, node1=2, node2=3 ; K*: node1=1, node2=2, node0=3
        // frame 1: K*=1 is node1 with K=2 > 1, K=1 is node0 with K*=3 > 1
        // frame 2: K*=2 is node2 (K=3), K=2 is node1 (K*=1) -> node1
        // frame 3: K*=3 node0 (K=1) -> node0, K=3 node2 (K*=2) -> node2
        let k = vec![0, 1, 2];
        let k_star = vec![1, 2, 0];
        assert_eq!(two_d_rank(&k, &k_star).unwrap(), vec![1, 0, 2]);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(two_d_rank(&[0, 1], &[0]).is_err());
        assert!(two_d_rank(&[0, 0], &[0, 1]).is_err());
    }

    #[test]
    fn overlap_cases() {
        let a = ["a", "b", "c", "d"];
        assert_eq!(overlap_curve(&a, &a, 4).unwrap(), vec![1.0; 4]);
        let b = ["e", "f", "g", "h"];
        assert_eq!(overlap_curve(&a, &b, 4).unwrap(), vec![0.0; 4]);
        let b = ["b", "a", "d", "e"];
        let eta = overlap_curve(&a, &b, 4).unwrap();
        assert_eq!(eta, vec![0.0, 1.0, 2.0 / 3.0, 0.75]);
        assert!(overlap_curve(&a, &b, 5).is_err());
        assert!(overlap_curve(&["a", "a"], &["b", "c"], 2).is_err());
    }
}
