//! Logarithmic-derivative sensitivity of the reduced PageRank to a single
//! link of a reduced matrix.
//!
//! The entry `G(u → c)` is scaled by `1 + δ`, column `u` is renormalized to
//! sum 1, and `D(u → c, c′) = d ln P(c′) / dδ` is estimated by finite
//! differences of the perturbed fixed points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{self, DenseMatrix};
use crate::error::{Error, Result};
use crate::google::IterationParams;

pub const DEFAULT_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// `[ln P(+δ) − ln P(−δ)] / 2δ`
    Central,
    /// `[ln P(+δ) − ln P(0)] / δ`
    Forward,
    /// `[ln P(0) − ln P(−δ)] / δ`
    Backward,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" => Ok(Scheme::Central),
            "forward" => Ok(Scheme::Forward),
            "backward" => Ok(Scheme::Backward),
            other => Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Central => "central",
            Scheme::Forward => "forward",
            Scheme::Backward => "backward",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityParams {
    pub delta: f64,
    pub scheme: Scheme,
    pub pagerank: IterationParams,
}

impl Default for SensitivityParams {
    fn default() -> Self {
        SensitivityParams {
            delta: DEFAULT_DELTA,
            scheme: Scheme::Central,
            pagerank: IterationParams::default(),
        }
    }
}

/// Scales entry `(c, u)` by `1 + delta` and renormalizes column `u`.
pub fn perturb_column(g_r: &DenseMatrix, u: usize, c: usize, delta: f64) -> Result<DenseMatrix> {
    let n = g_r.ncols();
    for index in [u, c] {
        if index >= n {
            return Err(Error::IndexOutOfRange {
                index,
                node_count: n,
            });
        }
    }
    if !(delta.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "perturbation must satisfy |delta| < 1, got {delta}"
        )));
    }
    if !(g_r[(c, u)] > 0.0) {
        return Err(Error::ZeroEntry { row: c, col: u });
    }
    let mut out = g_r.clone();
    out[(c, u)] *= 1.0 + delta;
    let total: f64 = out.column(u).iter().sum();
    out.column_mut(u).iter_mut().for_each(|x| *x /= total);
    Ok(out)
}

/// A stochastic matrix together with its converged fixed point.
#[derive(Debug, Clone)]
pub struct SensitivityContext {
    g_r: DenseMatrix,
    base: Vec<f64>,
    params: SensitivityParams,
}

impl SensitivityContext {
    pub fn new(g_r: DenseMatrix, params: SensitivityParams) -> Result<Self> {
        if !(params.delta.abs() < 1.0) || params.delta == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta must satisfy 0 < |delta| < 1, got {}",
                params.delta
            )));
        }
        let base = dense::stationary(&g_r, None, params.pagerank)?
            .require_converged("reduced pagerank")?
            .probabilities;
        Ok(SensitivityContext { g_r, base, params })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.g_r
    }

    pub fn base_pagerank(&self) -> &[f64] {
        &self.base
    }

    pub fn params(&self) -> &SensitivityParams {
        &self.params
    }

    fn perturbed_pagerank(&self, u: usize, c: usize, delta: f64) -> Result<Vec<f64>> {
        let m = perturb_column(&self.g_r, u, c, delta)?;
        Ok(
            dense::stationary(&m, Some(&self.base), self.params.pagerank)?
                .require_converged("perturbed reduced pagerank")?
                .probabilities,
        )
    }

    /// `D(u → c, c′)` for every `c′` in `observe`.
    pub fn derivatives(&self, u: usize, c: usize, observe: &[usize]) -> Result<Vec<f64>> {
        let n = self.g_r.ncols();
        for &index in observe {
            if index >= n {
                return Err(Error::IndexOutOfRange {
                    index,
                    node_count: n,
                });
            }
        }
        let delta = self.params.delta;
        let (hi, lo, step) = match self.params.scheme {
            Scheme::Central => (
                self.perturbed_pagerank(u, c, delta)?,
                self.perturbed_pagerank(u, c, -delta)?,
                2.0 * delta,
            ),
            Scheme::Forward => (
                self.perturbed_pagerank(u, c, delta)?,
                self.base.clone(),
                delta,
            ),
            Scheme::Backward => (
                self.base.clone(),
                self.perturbed_pagerank(u, c, -delta)?,
                delta,
            ),
        };
        observe
            .iter()
            .map(|&k| {
                if !(hi[k] > 0.0 && lo[k] > 0.0) {
                    return Err(Error::ZeroProbability(k));
                }
                Ok((hi[k].ln() - lo[k].ln()) / step)
            })
            .collect()
    }

    /// Diagonal sensitivity `D(u → c, c)`.
    pub fn diagonal(&self, u: usize, c: usize) -> Result<f64> {
        Ok(self.derivatives(u, c, &[c])?[0])
    }
}

/// Sensitivities for one perturbed link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub source: usize,
    pub target_link: usize,
    /// `D(u → c, c)`.
    pub diagonal: f64,
    /// `(c′, D(u → c, c′))` in the requested observation order.
    pub values: Vec<(usize, f64)>,
    pub delta: f64,
    pub scheme: Scheme,
}

pub fn diagonal_sensitivity(ctx: &SensitivityContext, u: usize, c: usize) -> Result<f64> {
    ctx.diagonal(u, c)
}

/// Batch of perturbations of the links `u → c` for every `c` in
/// `link_targets`, each observed on `observe`. Perturbations run in
/// parallel; results keep the order of `link_targets`.
pub fn sensitivity_table(
    ctx: &SensitivityContext,
    u: usize,
    link_targets: &[usize],
    observe: &[usize],
) -> Result<Vec<SensitivityResult>> {
    if observe.is_empty() {
        return Ok(Vec::new());
    }
    link_targets
        .par_iter()
        .map(|&c| {
            let mut wanted = observe.to_vec();
            wanted.push(c);
            let mut d = ctx.derivatives(u, c, &wanted)?;
            let diagonal = d.pop().expect("diagonal requested");
            Ok(SensitivityResult {
                source: u,
                target_link: c,
                diagonal,
                values: observe.iter().copied().zip(d).collect(),
                delta: ctx.params.delta,
                scheme: ctx.params.scheme,
            })
        })
        .collect()
}
