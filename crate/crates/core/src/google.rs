//! Implicit Google matrix `G = α S + (1 - α)/N` and its fixed points.
//!
//! `S` is the column-stochastic matrix of the graph: column `j` spreads
//! `1/outdeg(j)` over the targets of `j`, or `1/N` over every node when `j` is
//! dangling. Neither `S` nor `G` is ever materialized; products are computed
//! by pulling over in-edges, with the dangling and teleport contributions
//! folded into one scalar per product.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

pub const DEFAULT_ALPHA: f64 = 0.85;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Rows per parallel work item. Fixed so that reductions are bitwise
/// reproducible regardless of the number of threads.
pub(crate) const CHUNK: usize = 4096;

/// Stopping rule for power iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationParams {
    /// Bound on the L1 fixed-point residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterationParams {
    fn default() -> Self {
        IterationParams {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl IterationParams {
    pub fn new(tol: f64, max_iter: usize) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tol must be > 0, got {tol}"
            )));
        }
        if max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(IterationParams { tol, max_iter })
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.5 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0.5, 1), got {alpha}"
        )))
    }
}

/// Deterministic parallel sum: fixed-size chunks, partials added in order.
pub(crate) fn chunked_sum(x: &[f64]) -> f64 {
    x.par_chunks(CHUNK)
        .map(|c| c.iter().fold(0.0, |a, x| a + x))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, |a, x| a + x)
}

/// Per-column sums of a node-major block over the rows selected by `keep`,
/// with the same chunking and order as [`chunked_sum`].
pub(crate) fn block_column_sums<F>(x: &[f64], width: usize, keep: F) -> Vec<f64>
where
    F: Fn(usize) -> bool + Sync,
{
    let partials: Vec<Vec<f64>> = x
        .par_chunks(CHUNK * width)
        .enumerate()
        .map(|(c, rows)| {
            let mut acc = vec![0.0; width];
            for (k, row) in rows.chunks(width).enumerate() {
                if keep(c * CHUNK + k) {
                    for (a, v) in acc.iter_mut().zip(row) {
                        *a += v;
                    }
                }
            }
            acc
        })
        .collect();
    reduce_partials(partials, width)
}

/// Per-column sums of `x[rows[k]]` for a list of row indices.
pub(crate) fn block_gather_sums(x: &[f64], width: usize, rows: &[u32]) -> Vec<f64> {
    let partials: Vec<Vec<f64>> = rows
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; width];
            for &j in chunk {
                let row = &x[j as usize * width..(j as usize + 1) * width];
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
            acc
        })
        .collect();
    reduce_partials(partials, width)
}

fn reduce_partials(partials: Vec<Vec<f64>>, width: usize) -> Vec<f64> {
    let mut out = vec![0.0; width];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

pub(crate) fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum::<f64>())
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

/// The Google matrix of a graph, applied implicitly.
#[derive(Debug, Clone)]
pub struct GoogleOperator<'g> {
    graph: &'g DirectedGraph,
    alpha: f64,
    /// In-edges grouped by target, for the pull product.
    incoming: DirectedGraph,
    /// `1/outdeg(j)`, zero for dangling nodes.
    inv_degree: Vec<f64>,
    dangling: Vec<u32>,
}

impl<'g> GoogleOperator<'g> {
    pub fn new(graph: &'g DirectedGraph, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let n = graph.node_count();
        let inv_degree: Vec<f64> = (0..n)
            .map(|j| match graph.out_degree(j) {
                0 => 0.0,
                d => 1.0 / d as f64,
            })
            .collect();
        let dangling = (0..n)
            .filter(|&j| graph.is_dangling(j))
            .map(|j| j as u32)
            .collect();
        Ok(GoogleOperator {
            graph,
            alpha,
            incoming: graph.invert(),
            inv_degree,
            dangling,
        })
    }

    pub fn graph(&self) -> &'g DirectedGraph {
        self.graph
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Teleport floor `(1 - α)/N`: the value of `G_ij` when `j` links
    /// elsewhere but not to `i`.
    pub fn teleport(&self) -> f64 {
        (1.0 - self.alpha) / self.node_count() as f64
    }

    /// `G·v` for a probability vector `v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.node_count();
        if v.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: v.len(),
            });
        }
        let norm: f64 = v.iter().map(|x| x.abs()).sum();
        if v.iter().any(|&x| x < 0.0) || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm));
        }
        let mut out = vec![0.0; n];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// `out = G·x` for an arbitrary real vector `x`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.node_count();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        if n == 0 {
            return;
        }
        let weighted: Vec<f64> = x
            .par_iter()
            .zip(self.inv_degree.par_iter())
            .map(|(xj, w)| xj * w)
            .collect();
        let total = block_column_sums(x, 1, |_| true)[0];
        let dangling_mass = block_gather_sums(x, 1, &self.dangling)[0];
        let alpha = self.alpha;
        let shift = (alpha * dangling_mass + (1.0 - alpha) * total) / n as f64;
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let base = c * CHUNK;
                for (k, y) in chunk.iter_mut().enumerate() {
                    let i = base + k;
                    let pulled: f64 = self
                        .incoming
                        .targets(i)
                        .iter()
                        .fold(0.0, |a, &j| a + weighted[j as usize]);
                    *y = alpha * pulled + shift;
                }
            });
    }

    /// `out = Gᵀ·y`.
    pub fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        let n = self.node_count();
        debug_assert_eq!(y.len(), n);
        debug_assert_eq!(out.len(), n);
        if n == 0 {
            return;
        }
        let total = chunked_sum(y);
        let alpha = self.alpha;
        let teleport = (1.0 - alpha) * total / n as f64;
        let dangling_value = alpha * total / n as f64 + teleport;
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let base = c * CHUNK;
                for (k, o) in chunk.iter_mut().enumerate() {
                    let j = base + k;
                    let targets = self.graph.targets(j);
                    *o = if targets.is_empty() {
                        dangling_value
                    } else {
                        let s: f64 = targets.iter().map(|&i| y[i as usize]).sum();
                        alpha * s * self.inv_degree[j] + teleport
                    };
                }
            });
    }

    /// `out = G·X` for a block of `width` vectors stored node-major
    /// (`x[i * width + c]` is entry `i` of vector `c`).
    ///
    /// Every column is computed with exactly the same operation order as
    /// [`apply_into`](Self::apply_into), so results do not depend on how
    /// vectors are grouped into blocks.
    pub fn apply_block_into(&self, x: &[f64], width: usize, out: &mut [f64]) {
        let n = self.node_count();
        debug_assert_eq!(x.len(), n * width);
        debug_assert_eq!(out.len(), n * width);
        if n == 0 || width == 0 {
            return;
        }
        let mut weighted = vec![0.0; n * width];
        weighted
            .par_chunks_mut(width)
            .zip(x.par_chunks(width))
            .zip(self.inv_degree.par_iter())
            .for_each(|((w, xs), d)| {
                for (a, b) in w.iter_mut().zip(xs) {
                    *a = b * d;
                }
            });
        let totals = block_column_sums(x, width, |_| true);
        let dangling_mass = block_gather_sums(x, width, &self.dangling);
        let shifts: Vec<f64> = totals
            .iter()
            .zip(&dangling_mass)
            .map(|(t, d)| (self.alpha * d + (1.0 - self.alpha) * t) / n as f64)
            .collect();
        let alpha = self.alpha;
        out.par_chunks_mut(CHUNK * width)
            .enumerate()
            .for_each(|(c, rows)| {
                let base = c * CHUNK;
                let mut acc = vec![0.0; width];
                for (k, row) in rows.chunks_mut(width).enumerate() {
                    acc.iter_mut().for_each(|a| *a = 0.0);
                    for &j in self.incoming.targets(base + k) {
                        let src = &weighted[j as usize * width..(j as usize + 1) * width];
                        for (a, s) in acc.iter_mut().zip(src) {
                            *a += s;
                        }
                    }
                    for ((y, a), s) in row.iter_mut().zip(&acc).zip(&shifts) {
                        *y = alpha * a + s;
                    }
                }
            });
    }

    /// Column `j` of `G`, materialized.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let n = self.node_count();
        let teleport = self.teleport();
        let targets = self.graph.targets(j);
        if targets.is_empty() {
            return vec![self.alpha / n as f64 + teleport; n];
        }
        let mut col = vec![teleport; n];
        let w = self.alpha * self.inv_degree[j];
        for &i in targets {
            col[i as usize] = w + teleport;
        }
        col
    }

    /// Entry `G_ij`: transition probability from `j` to `i`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let n = self.node_count() as f64;
        let teleport = self.teleport();
        if self.graph.is_dangling(j) {
            self.alpha / n + teleport
        } else if self.graph.has_edge(j, i) {
            self.alpha * self.inv_degree[j] + teleport
        } else {
            teleport
        }
    }
}

/// Probability vector over nodes and its ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub probabilities: Vec<f64>,
    /// `ordering[k]` is the node with rank `k + 1`.
    pub ordering: Vec<usize>,
    /// Final L1 fixed-point residual.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl RankVector {
    pub fn new(probabilities: Vec<f64>, residual: f64, iterations: usize, converged: bool) -> Self {
        let ordering = ordering_of(&probabilities);
        RankVector {
            probabilities,
            ordering,
            residual,
            iterations,
            converged,
        }
    }

    /// 1-based rank `K` of every node.
    pub fn ranks(&self) -> Vec<usize> {
        ranks_of(&self.ordering)
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Turns an unconverged vector into an error.
    pub fn require_converged(self, what: &'static str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                what,
                iterations: self.iterations,
                residual: self.residual,
            })
        }
    }
}

/// Nodes by descending value, ties by ascending index.
pub fn ordering_of(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Inverse permutation of an ordering, as 1-based ranks.
pub fn ranks_of(ordering: &[usize]) -> Vec<usize> {
    let mut ranks = vec![0; ordering.len()];
    for (k, &node) in ordering.iter().enumerate() {
        ranks[node] = k + 1;
    }
    ranks
}

/// PageRank: power iteration from the uniform vector until
/// `‖G·v − v‖₁ < tol`. An unconverged result is returned with
/// `converged = false` and the last iterate.
pub fn pagerank(op: &GoogleOperator<'_>, params: IterationParams) -> RankVector {
    let n = op.node_count();
    if n == 0 {
        return RankVector::new(Vec::new(), 0.0, 0, true);
    }
    let start = vec![1.0 / n as f64; n];
    power_iterate(op, start, params)
}

/// PageRank started from an arbitrary positive vector (rescaled to sum 1).
pub fn pagerank_from(
    op: &GoogleOperator<'_>,
    start: &[f64],
    params: IterationParams,
) -> Result<RankVector> {
    let n = op.node_count();
    if start.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: start.len(),
        });
    }
    let total: f64 = start.iter().sum();
    if start.iter().any(|&x| x < 0.0) || !(total > 0.0) {
        return Err(Error::NotNormalized(total));
    }
    let start = start.iter().map(|x| x / total).collect();
    Ok(power_iterate(op, start, params))
}

fn power_iterate(op: &GoogleOperator<'_>, mut v: Vec<f64>, params: IterationParams) -> RankVector {
    let n = v.len();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < params.max_iter {
        op.apply_into(&v, &mut next);
        iterations += 1;
        let total = chunked_sum(&next);
        next.par_iter_mut().for_each(|x| *x /= total);
        residual = l1_distance(&next, &v);
        std::mem::swap(&mut v, &mut next);
        if residual < params.tol {
            break;
        }
        log::trace!("pagerank iteration {iterations}: residual {residual:e}");
    }
    let converged = residual < params.tol;
    RankVector::new(v, residual, iterations, converged)
}

/// CheiRank: PageRank of the graph with every link inverted.
pub fn cheirank(graph: &DirectedGraph, alpha: f64, params: IterationParams) -> Result<RankVector> {
    let inverted = graph.invert();
    let op = GoogleOperator::new(&inverted, alpha)?;
    Ok(pagerank(&op, params))
}
