//! Small shared linear-algebra helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition-number ceiling above which solved systems are rejected.
pub const COND_LIMIT: f64 = 1e12;

/// Contiguous view of column `j` of a column-major matrix.
#[inline]
pub(crate) fn col(m: &DMatrix<f64>, j: usize) -> &[f64] {
    let n = m.nrows();
    &m.as_slice()[j * n..(j + 1) * n]
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Empirical mean square `E_n[x^2]`.
#[inline]
pub(crate) fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    dot(x, x) / x.len() as f64
}

/// `sqrt(E_n[x^2])`, the empirical L2(P_n) norm.
#[inline]
pub(crate) fn rms(x: &[f64]) -> f64 {
    mean_square(x).sqrt()
}

/// Solves `A x = b` for square `A`, rejecting condition numbers above 1e12.
pub(crate) fn solve_checked(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > COND_LIMIT {
        return Err(Error::SingularSystem(if smin > 0.0 { smax / smin } else { f64::INFINITY }));
    }
    svd.solve(b, 0.0)
        .map_err(|e| Error::EigenFailure(e.to_string()))
}

/// Inverse of a square matrix with the same conditioning guard.
pub(crate) fn invert_checked(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > COND_LIMIT {
        return Err(Error::SingularSystem(if smin > 0.0 { smax / smin } else { f64::INFINITY }));
    }
    svd.pseudo_inverse(0.0)
        .map_err(|e| Error::EigenFailure(e.to_string()))
        .map(|m| m.resize(n, n, 0.0))
}

/// Least-squares fit of `y` on the columns of `x` via SVD.
///
/// Returns `(coef, fitted)`. Rank deficiency (relative singular-value gap
/// beyond 1e12) is an error carrying `support` for diagnosis.
pub(crate) fn least_squares(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    support: &[usize],
) -> Result<(DVector<f64>, DVector<f64>)> {
    let k = x.ncols();
    if k == 0 {
        return Ok((DVector::zeros(0), DVector::zeros(x.nrows())));
    }
    if x.nrows() < k {
        return Err(Error::RankDeficient(support.to_vec()));
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > COND_LIMIT {
        return Err(Error::RankDeficient(support.to_vec()));
    }
    let coef = svd
        .solve(y, 0.0)
        .map_err(|e| Error::EigenFailure(e.to_string()))?;
    let fitted = x * &coef;
    Ok((coef, fitted))
}

/// Orthonormal basis of the column space of `x` (thin SVD `U`), with the same
/// rank guard as [`least_squares`].
pub(crate) fn orthonormal_basis(x: &DMatrix<f64>, support: &[usize]) -> Result<DMatrix<f64>> {
    let k = x.ncols();
    if k == 0 {
        return Ok(DMatrix::zeros(x.nrows(), 0));
    }
    if x.nrows() < k {
        return Err(Error::RankDeficient(support.to_vec()));
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > COND_LIMIT {
        return Err(Error::RankDeficient(support.to_vec()));
    }
    Ok(svd.u.expect("svd with u requested"))
}
