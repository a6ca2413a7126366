//! Small dense column-stochastic matrices (reduced matrices and their
//! perturbations).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::google::{IterationParams, RankVector};

pub type DenseMatrix = DMatrix<f64>;

pub fn column_sums(m: &DenseMatrix) -> Vec<f64> {
    m.column_iter().map(|c| c.iter().sum()).collect()
}

/// Largest `|column sum − 1|`.
pub fn stochasticity_defect(m: &DenseMatrix) -> f64 {
    column_sums(m)
        .into_iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Sum of all entries divided by the matrix size.
pub fn weight(m: &DenseMatrix) -> f64 {
    if m.ncols() == 0 {
        return 0.0;
    }
    m.iter().sum::<f64>() / m.ncols() as f64
}

/// Fixed point of a column-stochastic matrix by power iteration.
///
/// Starts from `start` (rescaled to sum 1) or the uniform vector. The result
/// carries `converged = false` when `max_iter` is exhausted.
pub fn stationary(
    m: &DenseMatrix,
    start: Option<&[f64]>,
    params: IterationParams,
) -> Result<RankVector> {
    let n = m.ncols();
    if m.nrows() != n {
        return Err(Error::Invalid(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            n
        )));
    }
    if n == 0 {
        return Ok(RankVector::new(Vec::new(), 0.0, 0, true));
    }
    let mut v = match start {
        Some(s) if s.len() != n => {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: s.len(),
            })
        }
        Some(s) => {
            let total: f64 = s.iter().sum();
            if !(total > 0.0) || s.iter().any(|&x| x < 0.0) {
                return Err(Error::NotNormalized(total));
            }
            DVector::from_iterator(n, s.iter().map(|x| x / total))
        }
        None => DVector::from_element(n, 1.0 / n as f64),
    };
    let mut next = DVector::zeros(n);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < params.max_iter {
        next.gemv(1.0, m, &v, 0.0);
        iterations += 1;
        let total = next.sum();
        next /= total;
        residual = (&next - &v).abs().sum();
        std::mem::swap(&mut v, &mut next);
        if residual < params.tol {
            break;
        }
    }
    Ok(RankVector::new(
        v.iter().copied().collect(),
        residual,
        iterations,
        residual < params.tol,
    ))
}
