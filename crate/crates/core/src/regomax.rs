//! Reduced Google matrix of a node subset.
//!
//! With the nodes split into the subset `r` and its complement `s`, the
//! reduced matrix is `G_R = G_rr + G_rs (1 − G_ss)⁻¹ G_sr`. The resolvent is
//! split along the leading eigenpair `(λ_c, ψ_R, ψ_L)` of `G_ss`:
//!
//! * `G_pr = G_rs ψ_R ψ_Lᵀ G_sr / (1 − λ_c)`, a rank-one term;
//! * `G_qr = G_rs Q (1 − G_ss)⁻¹ G_sr` with `Q = 1 − ψ_R ψ_Lᵀ`, summed as
//!   the series `Σ_k (Q G_ss)^k Q G_sr` with `Q` re-applied after every
//!   product so that the `λ_c` mode cannot grow back through round-off.
//!
//! None of `G_rs`, `G_sr`, `G_ss` is formed: all products go through the
//! implicit [`GoogleOperator`] on full-length vectors that vanish on `r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{self, DenseMatrix};
use crate::error::{Error, Result};
use crate::google::{
    block_column_sums, chunked_sum, GoogleOperator, IterationParams, CHUNK, DEFAULT_ALPHA,
};
use crate::graph::{DirectedGraph, NodeSubset};

/// Entries below this are treated as a numerical failure.
pub const NEGATIVE_TOLERANCE: f64 = -1e-10;
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
pub const DEFAULT_BLOCK_WIDTH: usize = 32;

/// `10·⌈log(1e-12)/log α⌉`.
pub fn default_series_max(alpha: f64) -> usize {
    10 * ((1e-12f64).ln() / alpha.ln()).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionParams {
    pub alpha: f64,
    /// Power iterations for the eigenpair of `G_ss` and for the reduced
    /// PageRank.
    pub eigen: IterationParams,
    /// Per-column truncation of the `G_qr` series (L1 norm of the term).
    pub series_tol: f64,
    pub series_max: usize,
    /// Number of `G_qr` columns propagated together.
    pub block_width: usize,
}

impl Default for ReductionParams {
    fn default() -> Self {
        ReductionParams::with_alpha(DEFAULT_ALPHA)
    }
}

impl ReductionParams {
    pub fn with_alpha(alpha: f64) -> Self {
        ReductionParams {
            alpha,
            eigen: IterationParams::default(),
            series_tol: DEFAULT_SERIES_TOL,
            series_max: default_series_max(alpha),
            block_width: DEFAULT_BLOCK_WIDTH,
        }
    }
}

/// Leading eigenvalue of `G_ss` with right and left eigenvectors over the
/// complement, normalized so that `ψ_L·ψ_R = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPair {
    pub lambda_c: f64,
    /// Complement node indices, ascending; the basis of both vectors.
    pub complement: Vec<usize>,
    /// Non-negative, L1 norm 1.
    pub psi_right: Vec<f64>,
    pub psi_left: Vec<f64>,
    pub residual_right: f64,
    pub residual_left: f64,
    pub iterations_right: usize,
    pub iterations_left: usize,
}

impl SpectralPair {
    fn scatter(&self, values: &[f64], n: usize) -> Vec<f64> {
        let mut full = vec![0.0; n];
        for (&i, &v) in self.complement.iter().zip(values) {
            full[i] = v;
        }
        full
    }
}

fn in_subset_mask(subset: &NodeSubset, n: usize) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &i in subset.indices() {
        mask[i] = true;
    }
    mask
}

fn check_subset(subset: &NodeSubset, n: usize) -> Result<()> {
    for &index in subset.indices() {
        if index >= n {
            return Err(Error::IndexOutOfRange {
                index,
                node_count: n,
            });
        }
    }
    Ok(())
}

/// Power iteration for the dominant eigenpair of `G_ss` (right) and `G_ssᵀ`
/// (left), both started from the uniform vector on the complement.
pub fn leading_pair(
    op: &GoogleOperator<'_>,
    subset: &NodeSubset,
    params: IterationParams,
) -> Result<SpectralPair> {
    let n = op.node_count();
    check_subset(subset, n)?;
    if subset.is_empty() || subset.len() >= n {
        return Err(Error::InvalidParameter(format!(
            "subset size {} must lie in [1, N) with N = {n}",
            subset.len()
        )));
    }
    let mask = in_subset_mask(subset, n);
    let ((lambda, right, res_r, it_r), (_, mut left, res_l, it_l)) = rayon::join(
        || power_on_complement(&mask, params, |x, y| op.apply_into(x, y)),
        || power_on_complement(&mask, params, |x, y| op.apply_transpose_into(x, y)),
    );
    for (what, residual, iterations) in [
        ("G_ss right eigenvector", res_r, it_r),
        ("G_ss left eigenvector", res_l, it_l),
    ] {
        if !(residual < params.tol) {
            return Err(Error::NotConverged {
                what,
                iterations,
                residual,
            });
        }
    }
    let overlap = left.iter().zip(&right).fold(0.0, |a, (l, r)| a + l * r);
    if overlap.abs() < 1e-12 {
        return Err(Error::DegenerateNormalization(overlap));
    }
    left.iter_mut().for_each(|x| *x /= overlap);

    let complement: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
    let gather = |full: &[f64]| complement.iter().map(|&i| full[i]).collect::<Vec<_>>();
    Ok(SpectralPair {
        lambda_c: lambda,
        psi_right: gather(&right),
        psi_left: gather(&left),
        complement: complement.clone(),
        residual_right: res_r,
        residual_left: res_l,
        iterations_right: it_r,
        iterations_left: it_l,
    })
}

/// Returns `(λ, v, residual, iterations)` with `v ≥ 0`, `‖v‖₁ = 1`,
/// `λ = ‖A v‖₁` and residual `‖A v − λ v‖₁`, where `A` is the operator
/// restricted to the unmasked rows and columns.
fn power_on_complement<F>(
    mask: &[bool],
    params: IterationParams,
    apply: F,
) -> (f64, Vec<f64>, f64, usize)
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = mask.len();
    let n_s = mask.iter().filter(|&&m| !m).count();
    let mut v: Vec<f64> = mask
        .iter()
        .map(|&m| if m { 0.0 } else { 1.0 / n_s as f64 })
        .collect();
    let mut next = vec![0.0; n];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < params.max_iter {
        apply(&v, &mut next);
        iterations += 1;
        next.par_iter_mut()
            .zip(mask.par_iter())
            .for_each(|(x, &m)| {
                if m {
                    *x = 0.0
                }
            });
        lambda = chunked_sum(&next);
        residual = next
            .par_chunks(CHUNK)
            .zip(v.par_chunks(CHUNK))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .fold(0.0, |s, (p, q)| s + (p - lambda * q).abs())
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, |s, x| s + x);
        if residual < params.tol {
            break;
        }
        next.par_iter_mut().for_each(|x| *x /= lambda);
        std::mem::swap(&mut v, &mut next);
    }
    (lambda, v, residual, iterations)
}

/// Direct block `G_rr`: `(G_rr)_{iu} = α S_{iu} + (1 − α)/N` with the global
/// column normalization of `S`.
pub fn compute_grr(op: &GoogleOperator<'_>, subset: &NodeSubset) -> Result<DenseMatrix> {
    check_subset(subset, op.node_count())?;
    let idx = subset.indices();
    Ok(DenseMatrix::from_fn(idx.len(), idx.len(), |i, u| {
        op.entry(idx[i], idx[u])
    }))
}

/// Component weights: sum of all entries divided by `n_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub rr: f64,
    pub pr: f64,
    pub qr: f64,
    pub qrnd: f64,
}

/// Convergence record of a reduction.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReductionDiagnostics {
    pub eigen_iterations_right: usize,
    pub eigen_iterations_left: usize,
    pub eigen_residual_right: f64,
    pub eigen_residual_left: f64,
    /// Series terms used per `G_qr` column.
    pub series_terms: Vec<usize>,
    /// Columns whose series hit `series_max` before reaching `series_tol`.
    pub series_unconverged: Vec<usize>,
    pub pagerank_iterations: usize,
    pub pagerank_residual: f64,
}

/// Reduced Google matrix with its three components.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGoogleMatrix {
    /// Basis names (labels, or decimal indices for unlabelled nodes).
    pub names: Vec<String>,
    /// Global node indices of the basis, when computed from a graph.
    pub indices: Vec<usize>,
    pub alpha: f64,
    /// Size `N` of the global network.
    pub global_node_count: usize,
    pub g_rr: DenseMatrix,
    pub g_pr: DenseMatrix,
    pub g_qr: DenseMatrix,
    pub lambda_c: f64,
    pub reduced_pagerank: Vec<f64>,
    pub params: Option<ReductionParams>,
    pub diagnostics: ReductionDiagnostics,
}

impl ReducedGoogleMatrix {
    pub fn n_r(&self) -> usize {
        self.g_rr.ncols()
    }

    pub fn g_r(&self) -> DenseMatrix {
        &self.g_rr + &self.g_pr + &self.g_qr
    }

    /// `G_qr` with its diagonal removed.
    pub fn qrnd(&self) -> DenseMatrix {
        qrnd(&self.g_qr)
    }

    /// Teleport floor `(1 − α)/N` of the global matrix.
    pub fn teleport(&self) -> f64 {
        (1.0 - self.alpha) / self.global_node_count as f64
    }

    pub fn weights(&self) -> Weights {
        Weights {
            rr: dense::weight(&self.g_rr),
            pr: dense::weight(&self.g_pr),
            qr: dense::weight(&self.g_qr),
            qrnd: dense::weight(&self.qrnd()),
        }
    }

    pub fn position_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

pub fn qrnd(g_qr: &DenseMatrix) -> DenseMatrix {
    let mut out = g_qr.clone();
    out.fill_diagonal(0.0);
    out
}

/// Fixed point of `G_R` by power iteration.
pub fn reduced_pagerank(m: &ReducedGoogleMatrix, params: IterationParams) -> Result<Vec<f64>> {
    let pr = dense::stationary(&m.g_r(), None, params)?.require_converged("reduced pagerank")?;
    Ok(pr.probabilities)
}

/// Computes `G_rr`, `G_pr`, `G_qr`, `λ_c` and the reduced PageRank.
pub fn compute_components(
    graph: &DirectedGraph,
    subset: &NodeSubset,
    params: ReductionParams,
) -> Result<ReducedGoogleMatrix> {
    let op = GoogleOperator::new(graph, params.alpha)?;
    compute_with_operator(&op, subset, params)
}

pub fn compute_with_operator(
    op: &GoogleOperator<'_>,
    subset: &NodeSubset,
    params: ReductionParams,
) -> Result<ReducedGoogleMatrix> {
    let n = op.node_count();
    let n_r = subset.len();
    if n_r == 0 {
        return Err(Error::InvalidParameter("empty subset".into()));
    }
    if !(params.series_tol > 0.0) || params.series_max == 0 || params.block_width == 0 {
        return Err(Error::InvalidParameter(
            "series_tol, series_max and block_width must be positive".into(),
        ));
    }
    let g_rr = compute_grr(op, subset)?;
    let mut diagnostics = ReductionDiagnostics::default();

    let (g_pr, g_qr, lambda_c) = if n_r == n {
        let zero = DenseMatrix::zeros(n_r, n_r);
        diagnostics.series_terms = vec![0; n_r];
        (zero.clone(), zero, 0.0)
    } else {
        let pair = leading_pair(op, subset, params.eigen)?;
        diagnostics.eigen_iterations_right = pair.iterations_right;
        diagnostics.eigen_iterations_left = pair.iterations_left;
        diagnostics.eigen_residual_right = pair.residual_right;
        diagnostics.eigen_residual_left = pair.residual_left;
        let g_pr = projector_component(op, subset, &pair);
        let (g_qr, terms, unconverged) = resolvent_component(op, subset, &pair, &params);
        if !unconverged.is_empty() {
            log::warn!(
                "G_qr series did not reach {:e} within {} terms for {} columns",
                params.series_tol,
                params.series_max,
                unconverged.len()
            );
        }
        diagnostics.series_terms = terms;
        diagnostics.series_unconverged = unconverged;
        (g_pr, g_qr, pair.lambda_c)
    };

    let graph = op.graph();
    let mut m = ReducedGoogleMatrix {
        names: subset
            .indices()
            .iter()
            .map(|&i| graph.display_name(i))
            .collect(),
        indices: subset.indices().to_vec(),
        alpha: op.alpha(),
        global_node_count: n,
        g_rr,
        g_pr,
        g_qr,
        lambda_c,
        reduced_pagerank: Vec::new(),
        params: Some(params),
        diagnostics,
    };
    check_non_negative(&m)?;
    let pr =
        dense::stationary(&m.g_r(), None, params.eigen)?.require_converged("reduced pagerank")?;
    m.diagnostics.pagerank_iterations = pr.iterations;
    m.diagnostics.pagerank_residual = pr.residual;
    m.reduced_pagerank = pr.probabilities;
    Ok(m)
}

/// `G_rr` and `G_pr` are non-negative by construction and `G_R` is a
/// transition matrix; entries below [`NEGATIVE_TOLERANCE`] mean the series
/// or the eigenpair went wrong. `G_qr` alone is a signed correction and is
/// not checked.
fn check_non_negative(m: &ReducedGoogleMatrix) -> Result<()> {
    let g_r = m.g_r();
    for (component, mat) in [("G_rr", &m.g_rr), ("G_pr", &m.g_pr), ("G_R", &g_r)] {
        for col in 0..mat.ncols() {
            for row in 0..mat.nrows() {
                let value = mat[(row, col)];
                if value < NEGATIVE_TOLERANCE || value.is_nan() {
                    return Err(Error::NegativeEntry {
                        component,
                        row,
                        col,
                        value,
                    });
                }
            }
        }
    }
    Ok(())
}

/// `G_pr = (G_rs ψ_R)(G_srᵀ ψ_L)ᵀ / (1 − λ_c)`.
fn projector_component(
    op: &GoogleOperator<'_>,
    subset: &NodeSubset,
    pair: &SpectralPair,
) -> DenseMatrix {
    let n = op.node_count();
    let idx = subset.indices();
    let right = pair.scatter(&pair.psi_right, n);
    let left = pair.scatter(&pair.psi_left, n);
    let mut g_right = vec![0.0; n];
    let mut gt_left = vec![0.0; n];
    op.apply_into(&right, &mut g_right);
    op.apply_transpose_into(&left, &mut gt_left);
    let scale = 1.0 / (1.0 - pair.lambda_c);
    DenseMatrix::from_fn(idx.len(), idx.len(), |i, u| {
        g_right[idx[i]] * gt_left[idx[u]] * scale
    })
}

/// Projected Neumann series for `G_qr`, a block of columns at a time.
///
/// Column `u` starts from `x₀ = Q G_sr e_u`; each term contributes `G_rs x_k`
/// and the next term is `x_{k+1} = Q G_ss x_k`. A column stops once
/// `‖x_k‖₁ < series_tol`. Every column follows the same arithmetic whatever
/// block it lands in, so the result does not depend on `block_width`.
fn resolvent_component(
    op: &GoogleOperator<'_>,
    subset: &NodeSubset,
    pair: &SpectralPair,
    params: &ReductionParams,
) -> (DenseMatrix, Vec<usize>, Vec<usize>) {
    let n = op.node_count();
    let idx = subset.indices();
    let n_r = idx.len();
    let mask = in_subset_mask(subset, n);
    let right = pair.scatter(&pair.psi_right, n);
    let left = pair.scatter(&pair.psi_left, n);

    let mut g_qr = DenseMatrix::zeros(n_r, n_r);
    let mut terms = vec![0usize; n_r];
    let mut unconverged = Vec::new();

    for first in (0..n_r).step_by(params.block_width) {
        let cols: Vec<usize> = (first..n_r.min(first + params.block_width)).collect();
        let width = cols.len();
        let mut x = vec![0.0; n * width];
        for (c, &u) in cols.iter().enumerate() {
            for (i, value) in op.column(idx[u]).into_iter().enumerate() {
                if !mask[i] {
                    x[i * width + c] = value;
                }
            }
        }
        project(&mut x, width, &right, &left);

        let mut active = vec![true; width];
        let mut y = vec![0.0; n * width];
        let mut k = 0;
        loop {
            let norms = block_abs_sums(&x, width);
            for c in 0..width {
                if active[c] && norms[c] < params.series_tol {
                    active[c] = false;
                    terms[cols[c]] = k;
                }
            }
            if !active.iter().any(|&a| a) {
                break;
            }
            if k == params.series_max {
                for c in 0..width {
                    if active[c] {
                        terms[cols[c]] = k;
                        unconverged.push(cols[c]);
                    }
                }
                break;
            }
            // Finished columns are zeroed so they stay inert.
            for (c, &a) in active.iter().enumerate() {
                if !a {
                    x.par_chunks_mut(width).for_each(|row| row[c] = 0.0);
                }
            }
            op.apply_block_into(&x, width, &mut y);
            for (c, &u) in cols.iter().enumerate() {
                if active[c] {
                    for (i, &node) in idx.iter().enumerate() {
                        g_qr[(i, u)] += y[node * width + c];
                    }
                }
            }
            y.par_chunks_mut(width)
                .zip(mask.par_iter())
                .for_each(|(row, &m)| {
                    if m {
                        row.iter_mut().for_each(|v| *v = 0.0);
                    }
                });
            std::mem::swap(&mut x, &mut y);
            project(&mut x, width, &right, &left);
            k += 1;
        }
    }
    (g_qr, terms, unconverged)
}

/// `x ← (1 − ψ_R ψ_Lᵀ) x` column-wise on a node-major block.
fn project(x: &mut [f64], width: usize, right: &[f64], left: &[f64]) {
    let partials: Vec<Vec<f64>> = x
        .par_chunks(CHUNK * width)
        .zip(left.par_chunks(CHUNK))
        .map(|(rows, l)| {
            let mut acc = vec![0.0; width];
            for (row, &w) in rows.chunks(width).zip(l) {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += w * v;
                }
            }
            acc
        })
        .collect();
    let mut dots = vec![0.0; width];
    for p in partials {
        for (d, v) in dots.iter_mut().zip(p) {
            *d += v;
        }
    }
    x.par_chunks_mut(width)
        .zip(right.par_iter())
        .for_each(|(row, &r)| {
            for (v, d) in row.iter_mut().zip(&dots) {
                *v -= r * d;
            }
        });
}

fn block_abs_sums(x: &[f64], width: usize) -> Vec<f64> {
    let abs: Vec<f64> = x.par_iter().map(|v| v.abs()).collect();
    block_column_sums(&abs, width, |_| true)
}
