//! Sparse first-stage solvers with verifiable optimality certificates.
//!
//! The penalized objectives, with `Qhat(b) = E_n[(y_i - f_i'b)^2]` an average
//! (never a sum):
//!
//! ```text
//! LASSO:      Qhat(b)       + (lambda/n) * |b|_1
//! sqrt-LASSO: sqrt(Qhat(b)) + (lambda/n) * |b|_1
//! ```
//!
//! Every fit returns a `kkt_gap`: the largest violation of the stationarity
//! system of the objective, recomputed from scratch at the final iterate. A
//! gap of zero certifies exact optimality, so the contract is testable
//! without reference to any particular algorithm.
//!
//! LASSO is solved by cyclic coordinate descent with covariance updates
//! (Gram columns are formed lazily the first time a coordinate activates,
//! after which every residual correlation is maintained incrementally).
//! sqrt-LASSO alternates a scaled-LASSO reformulation: solve LASSO at
//! effective penalty `2*lambda*sqrt(Qhat)`, refresh `sqrt(Qhat)`, repeat
//! until the sqrt-LASSO stationarity system certifies.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{col, dot, mean_square, rms};

/// Default convergence tolerance on the KKT gap.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default cap on coordinate-descent sweeps.
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Residual mean-square below this makes the sqrt-LASSO certificate undefined.
pub const PERFECT_FIT_TOL: f64 = 1e-14;

/// Which penalized objective a certificate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Lasso,
    SqrtLasso,
}

/// First-stage estimator provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Method {
    Lasso,
    SqrtLasso,
    PostLasso,
    PostSqrtLasso,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Lasso => "lasso",
            Method::SqrtLasso => "sqrt-lasso",
            Method::PostLasso => "post-lasso",
            Method::PostSqrtLasso => "post-sqrt-lasso",
        };
        f.write_str(s)
    }
}

/// A sparse coefficient vector with its support.
#[derive(Debug, Clone)]
pub struct SparseCoef {
    pub beta: DVector<f64>,
    /// Ascending indices of the nonzero entries of `beta`.
    pub support: Vec<usize>,
    pub method: Method,
}

impl SparseCoef {
    pub fn new(beta: DVector<f64>, method: Method) -> Self {
        let support = beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect();
        Self { beta, support, method }
    }
}

/// Output of one sparse first-stage regression.
#[derive(Debug, Clone)]
pub struct FirstStageFit {
    pub coef: SparseCoef,
    /// Fitted optimal-instrument values `F * beta`.
    pub fitted: DVector<f64>,
    pub lambda: f64,
    pub residual_rms: f64,
    /// Largest stationarity violation at the returned iterate (fresh computation).
    pub kkt_gap: f64,
}

fn check_normalized(f: &DMatrix<f64>) -> Result<()> {
    for j in 0..f.ncols() {
        let msq = mean_square(col(f, j));
        if (msq - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized { col: j, msq });
        }
    }
    Ok(())
}

fn check_dims(f: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if f.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows but y has {}",
            f.nrows(),
            y.len()
        )));
    }
    Ok(())
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Residual correlations `rho_j = E_n[f_ij r_i]` for `r = y - F beta`,
/// computed from scratch. `O(n(p + |support|))`.
fn residual_correlations(f: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> Vec<f64> {
    let n = f.nrows();
    let mut r: Vec<f64> = y.as_slice().to_vec();
    for (j, &bj) in beta.iter().enumerate() {
        if bj != 0.0 {
            for (ri, fij) in r.iter_mut().zip(col(f, j)) {
                *ri -= fij * bj;
            }
        }
    }
    (0..f.ncols()).map(|j| dot(col(f, j), &r) / n as f64).collect()
}

fn lasso_gap_from_correlations(rho: &[f64], beta: &DVector<f64>, lambda_over_n: f64) -> f64 {
    let mut gap: f64 = 0.0;
    for (j, &bj) in beta.iter().enumerate() {
        let v = if bj != 0.0 {
            (2.0 * rho[j] - lambda_over_n * bj.signum()).abs()
        } else {
            (2.0 * rho[j].abs() - lambda_over_n).max(0.0)
        };
        gap = gap.max(v);
    }
    gap
}

fn sqrt_lasso_gap_from_correlations(
    rho: &[f64],
    beta: &DVector<f64>,
    lambda_over_n: f64,
    qhat: f64,
) -> Result<f64> {
    if qhat < PERFECT_FIT_TOL {
        return Err(Error::PerfectFit);
    }
    let scale = qhat.sqrt();
    let mut gap: f64 = 0.0;
    for (j, &bj) in beta.iter().enumerate() {
        let v = if bj != 0.0 {
            (rho[j] / scale - lambda_over_n * bj.signum()).abs()
        } else {
            (rho[j].abs() / scale - lambda_over_n).max(0.0)
        };
        gap = gap.max(v);
    }
    Ok(gap)
}

/// Largest violation of the stationarity conditions of the given objective at
/// `beta`. Zero means exact optimality; the conditions are
///
/// ```text
/// LASSO:      active j: 2 E_n[f_ij r_i] = (lambda/n) sign(b_j)
///             inactive:  |2 E_n[f_ij r_i]| <= lambda/n
/// sqrt-LASSO: active j: E_n[f_ij r_i]/sqrt(Qhat) = (lambda/n) sign(b_j)
///             inactive:  |E_n[f_ij r_i]|/sqrt(Qhat) <= lambda/n
/// ```
///
/// with `r = y - F beta`. For [`Objective::SqrtLasso`] a residual
/// mean-square below 1e-14 is a [`Error::PerfectFit`].
pub fn kkt_check(
    f: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: &DVector<f64>,
    lambda: f64,
    objective: Objective,
) -> Result<f64> {
    check_dims(f, y)?;
    if beta.len() != f.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "beta has {} entries but design has {} columns",
            beta.len(),
            f.ncols()
        )));
    }
    let n = f.nrows() as f64;
    let rho = residual_correlations(f, y, beta);
    match objective {
        Objective::Lasso => Ok(lasso_gap_from_correlations(&rho, beta, lambda / n)),
        Objective::SqrtLasso => {
            let qhat = {
                let mut r: Vec<f64> = y.as_slice().to_vec();
                for (j, &bj) in beta.iter().enumerate() {
                    if bj != 0.0 {
                        for (ri, fij) in r.iter_mut().zip(col(f, j)) {
                            *ri -= fij * bj;
                        }
                    }
                }
                mean_square(&r)
            };
            sqrt_lasso_gap_from_correlations(&rho, beta, lambda / n, qhat)
        }
    }
}

/// Value of the penalized objective at `beta`.
pub fn objective_value(
    f: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: &DVector<f64>,
    lambda: f64,
    objective: Objective,
) -> f64 {
    let resid = y - f * beta;
    let q = mean_square(resid.as_slice());
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let pen = lambda / f.nrows() as f64 * l1;
    match objective {
        Objective::Lasso => q + pen,
        Objective::SqrtLasso => q.sqrt() + pen,
    }
}

/// Coordinate-descent state with lazily materialized Gram columns.
struct CdState<'a> {
    f: &'a DMatrix<f64>,
    n: usize,
    p: usize,
    /// Gram diagonal `E_n[f_j^2]` (within 1e-8 of one, but used exactly).
    diag: Vec<f64>,
    /// `E_n[f_j y]`, fixed.
    cy: Vec<f64>,
    /// Column j of `F'F / n`, filled on first activation of j.
    gram: Vec<Option<Box<[f64]>>>,
    /// Current residual correlations `E_n[f_j r]`, maintained incrementally.
    rho: Vec<f64>,
    beta: DVector<f64>,
    /// Coordinates that ever became active (cycled in the inner sweeps).
    active: Vec<usize>,
    is_active: Vec<bool>,
}

impl<'a> CdState<'a> {
    fn new(f: &'a DMatrix<f64>, y: &DVector<f64>, warm: Option<&DVector<f64>>) -> Self {
        let (n, p) = (f.nrows(), f.ncols());
        let nf = n as f64;
        let diag: Vec<f64> = (0..p).map(|j| dot(col(f, j), col(f, j)) / nf).collect();
        let cy: Vec<f64> = (0..p).map(|j| dot(col(f, j), y.as_slice()) / nf).collect();
        let beta = warm.cloned().unwrap_or_else(|| DVector::zeros(p));
        let mut state = Self {
            f,
            n,
            p,
            diag,
            rho: cy.clone(),
            cy,
            gram: vec![None; p],
            beta,
            active: Vec::new(),
            is_active: vec![false; p],
        };
        let warm_support: Vec<usize> = state
            .beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect();
        if !warm_support.is_empty() {
            for &j in &warm_support {
                state.ensure_gram(j);
                state.mark_active(j);
            }
            state.refresh_rho();
        }
        state
    }

    fn ensure_gram(&mut self, j: usize) {
        if self.gram[j].is_none() {
            let nf = self.n as f64;
            let cj = col(self.f, j);
            let g: Vec<f64> = (0..self.p).map(|k| dot(cj, col(self.f, k)) / nf).collect();
            self.gram[j] = Some(g.into_boxed_slice());
        }
    }

    fn mark_active(&mut self, j: usize) {
        if !self.is_active[j] {
            self.is_active[j] = true;
            self.active.push(j);
        }
    }

    /// Recomputes rho exactly from the cached Gram columns of the support.
    fn refresh_rho(&mut self) {
        self.rho.copy_from_slice(&self.cy);
        for j in 0..self.p {
            let bj = self.beta[j];
            if bj != 0.0 {
                let g = self.gram[j].as_ref().expect("gram column for active coordinate");
                for (rk, gk) in self.rho.iter_mut().zip(g.iter()) {
                    *rk -= gk * bj;
                }
            }
        }
    }

    /// One coordinate move; returns the absolute coefficient change.
    fn update_coord(&mut self, j: usize, threshold: f64) -> f64 {
        let dj = self.diag[j];
        let z = self.rho[j] + dj * self.beta[j];
        let bnew = soft_threshold(z, threshold) / dj;
        let delta = bnew - self.beta[j];
        if delta != 0.0 {
            self.ensure_gram(j);
            self.mark_active(j);
            let g = self.gram[j].as_ref().unwrap();
            for (rk, gk) in self.rho.iter_mut().zip(g.iter()) {
                *rk -= gk * delta;
            }
            self.beta[j] = bnew;
        }
        delta.abs()
    }

    fn finish(self, y: &DVector<f64>, lambda: f64, method: Method) -> FirstStageFit {
        build_fit(self.f, y, self.beta, lambda, method)
    }
}

fn build_fit(
    f: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: DVector<f64>,
    lambda: f64,
    method: Method,
) -> FirstStageFit {
    let n = f.nrows();
    let mut fitted = DVector::zeros(n);
    for (j, &bj) in beta.iter().enumerate() {
        if bj != 0.0 {
            for (out, fij) in fitted.iter_mut().zip(col(f, j)) {
                *out += fij * bj;
            }
        }
    }
    let resid = y - &fitted;
    let residual_rms = rms(resid.as_slice());
    let objective = match method {
        Method::SqrtLasso => Objective::SqrtLasso,
        _ => Objective::Lasso,
    };
    // For OLS refits lambda is zero and the lasso gap reduces to the
    // orthogonality defect on the support.
    let kkt_gap = kkt_check(f, y, &beta, lambda, objective).unwrap_or(f64::NAN);
    FirstStageFit {
        coef: SparseCoef::new(beta, method),
        fitted,
        lambda,
        residual_rms,
        kkt_gap,
    }
}

/// LASSO via cyclic coordinate descent. See the module docs for the objective
/// convention; convergence is declared when the freshly recomputed KKT gap is
/// at most `tol`.
pub fn lasso(
    f: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FirstStageFit> {
    lasso_warm(f, y, lambda, tol, max_iter, None)
}

/// LASSO with an optional warm-start coefficient vector (used by the
/// cross-validation path and the sqrt-LASSO outer loop).
pub fn lasso_warm(
    f: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    warm: Option<&DVector<f64>>,
) -> Result<FirstStageFit> {
    check_dims(f, y)?;
    check_normalized(f)?;
    if lambda < 0.0 {
        return Err(Error::InvalidInput(format!("lambda must be nonnegative, got {lambda}")));
    }
    let n = f.nrows() as f64;
    let threshold = lambda / (2.0 * n);
    let mut state = CdState::new(f, y, warm);
    let mut sweeps = 0usize;

    loop {
        // Full sweep over all coordinates.
        for j in 0..state.p {
            state.update_coord(j, threshold);
        }
        sweeps += 1;

        // Inner sweeps over the active set until it stabilizes.
        loop {
            if sweeps >= max_iter {
                break;
            }
            let mut max_delta: f64 = 0.0;
            let active = state.active.clone();
            for &j in &active {
                max_delta = max_delta.max(state.update_coord(j, threshold));
            }
            sweeps += 1;
            if max_delta <= tol * 1e-2 {
                break;
            }
        }

        // Incremental gap, then authoritative fresh check against drift.
        let gap = lasso_gap_from_correlations(&state.rho, &state.beta, lambda / n);
        if gap <= tol {
            let fresh = residual_correlations(f, y, &state.beta);
            let fresh_gap = lasso_gap_from_correlations(&fresh, &state.beta, lambda / n);
            if fresh_gap <= tol {
                return Ok(state.finish(y, lambda, Method::Lasso));
            }
            state.rho = fresh;
        }
        if sweeps >= max_iter {
            let fit = state.finish(y, lambda, Method::Lasso);
            let kkt_gap = fit.kkt_gap;
            return Err(Error::NonConvergence { max_iter, kkt_gap, best: Box::new(fit) });
        }
    }
}

/// sqrt-LASSO via the scaled-LASSO fixed point: repeatedly solve LASSO at
/// effective penalty `2*lambda*sqrt(Qhat(beta))` and refresh the residual
/// scale, until the sqrt-LASSO KKT system certifies within `tol`.
pub fn sqrt_lasso(
    f: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FirstStageFit> {
    check_dims(f, y)?;
    check_normalized(f)?;
    if lambda < 0.0 {
        return Err(Error::InvalidInput(format!("lambda must be nonnegative, got {lambda}")));
    }
    let q0 = mean_square(y.as_slice());
    if q0 < PERFECT_FIT_TOL {
        return Err(Error::InvalidInput("y is identically zero".into()));
    }
    let n = f.nrows() as f64;
    let mut beta = DVector::zeros(f.ncols());
    let mut sigma = q0.sqrt();
    let mut inner_tol_factor = 0.5;
    const MAX_OUTER: usize = 200;

    for _ in 0..MAX_OUTER {
        let lambda_eff = 2.0 * lambda * sigma;
        let inner_tol = (tol * sigma * inner_tol_factor).max(f64::MIN_POSITIVE);
        let fit = match lasso_warm(f, y, lambda_eff, inner_tol, max_iter, Some(&beta)) {
            Ok(fit) => fit,
            Err(Error::NonConvergence { max_iter, kkt_gap, best }) => {
                return Err(Error::NonConvergence { max_iter, kkt_gap, best })
            }
            Err(e) => return Err(e),
        };
        beta = fit.coef.beta;
        let qhat = {
            let resid = y - f * &beta;
            mean_square(resid.as_slice())
        };
        if qhat < PERFECT_FIT_TOL {
            return Err(Error::PerfectFit);
        }
        let rho = residual_correlations(f, y, &beta);
        let gap = sqrt_lasso_gap_from_correlations(&rho, &beta, lambda / n, qhat)?;
        if gap <= tol {
            return Ok(build_fit(f, y, beta, lambda, Method::SqrtLasso));
        }
        let sigma_new = qhat.sqrt();
        if (sigma_new - sigma).abs() <= 1e-14 * sigma {
            // Scale has converged but the certificate has not: tighten the
            // inner solve instead of looping on a stale fixed point.
            inner_tol_factor *= 0.1;
        }
        sigma = sigma_new;
    }
    let fit = build_fit(f, y, beta, lambda, Method::SqrtLasso);
    let kkt_gap = fit.kkt_gap;
    Err(Error::NonConvergence { max_iter: MAX_OUTER, kkt_gap, best: Box::new(fit) })
}

/// OLS refit on a fixed support, zero elsewhere.
///
/// An empty support is a legitimate statistical outcome, returned as a
/// distinguished zero fit rather than an error so callers can count
/// zero-selection replications. Collinear selected columns are a
/// [`Error::RankDeficient`].
pub fn post_ols(
    f: &DMatrix<f64>,
    y: &DVector<f64>,
    support: &[usize],
    method: Method,
) -> Result<FirstStageFit> {
    check_dims(f, y)?;
    let (n, p) = (f.nrows(), f.ncols());
    let mut support: Vec<usize> = support.to_vec();
    support.sort_unstable();
    support.dedup();
    if let Some(&j) = support.iter().find(|&&j| j >= p) {
        return Err(Error::InvalidInput(format!("support index {j} out of range (p = {p})")));
    }
    if support.is_empty() {
        return Ok(build_fit(f, y, DVector::zeros(p), 0.0, method));
    }
    if support.len() > n {
        return Err(Error::RankDeficient(support));
    }
    let sub = f.select_columns(support.iter());
    let (coef_s, _fitted) = crate::linalg::least_squares(&sub, y, &support)?;
    let mut beta = DVector::zeros(p);
    for (idx, &j) in support.iter().enumerate() {
        beta[j] = coef_s[idx];
    }
    Ok(build_fit(f, y, beta, 0.0, method))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn univariate_instance() -> (DMatrix<f64>, DVector<f64>) {
        (
            DMatrix::from_column_slice(4, 1, &[1.0, 1.0, -1.0, -1.0]),
            DVector::from_column_slice(&[2.0, 2.0, 0.0, 0.0]),
        )
    }

    /// Brute-force grid minimizer of a univariate penalized objective.
    fn grid_minimizer(
        f: &DMatrix<f64>,
        y: &DVector<f64>,
        lambda: f64,
        obj: Objective,
        lo: f64,
        hi: f64,
        step: f64,
    ) -> f64 {
        let mut best = (f64::INFINITY, lo);
        let mut b = lo;
        while b <= hi + 1e-15 {
            let v = objective_value(f, y, &DVector::from_column_slice(&[b]), lambda, obj);
            if v < best.0 {
                best = (v, b);
            }
            b += step;
        }
        best.1
    }

    #[test]
    fn lasso_univariate_matches_soft_threshold_and_grid() {
        let (f, y) = univariate_instance();
        // E_n[f y] = 1, lambda/(2n) = 0.25, so beta = 0.75
        let fit = lasso(&f, &y, 2.0, 1e-10, 1000).unwrap();
        assert_relative_eq!(fit.coef.beta[0], 0.75, epsilon = 1e-10);
        assert!(fit.kkt_gap <= 1e-10);
        let grid = grid_minimizer(&f, &y, 2.0, Objective::Lasso, -2.0, 2.0, 1e-4);
        assert!((fit.coef.beta[0] - grid).abs() <= 1e-4);
    }

    #[test]
    fn lasso_zero_above_lambda_max() {
        let (f, y) = univariate_instance();
        // lambda_max = 2n * max_j |E_n[f_j y]| = 8
        let fit = lasso(&f, &y, 8.0, 1e-12, 1000).unwrap();
        assert_eq!(fit.coef.beta[0], 0.0);
        assert_eq!(fit.kkt_gap, 0.0);
        assert!(fit.coef.support.is_empty());
    }

    #[test]
    fn lasso_zero_response() {
        let (f, _) = univariate_instance();
        let y = DVector::zeros(4);
        let fit = lasso(&f, &y, 1.0, 1e-12, 1000).unwrap();
        assert_eq!(fit.coef.beta[0], 0.0);
    }

    #[test]
    fn lasso_objective_never_above_zero_vector() {
        let f = DMatrix::from_column_slice(4, 2, &[1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        let y = DVector::from_column_slice(&[2.0, 1.0, 0.5, 0.0]);
        for lambda in [0.1, 1.0, 4.0, 20.0] {
            let fit = lasso(&f, &y, lambda, 1e-9, 10_000).unwrap();
            let at_fit = objective_value(&f, &y, &fit.coef.beta, lambda, Objective::Lasso);
            let at_zero = objective_value(&f, &y, &DVector::zeros(2), lambda, Objective::Lasso);
            assert!(at_fit <= at_zero + 1e-12);
        }
    }

    #[test]
    fn lasso_rejects_unnormalized_design() {
        let f = DMatrix::from_column_slice(4, 1, &[2.0, 2.0, -2.0, -2.0]);
        let y = DVector::from_column_slice(&[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            lasso(&f, &y, 1.0, 1e-8, 100),
            Err(Error::NotNormalized { col: 0, .. })
        ));
    }

    #[test]
    fn sqrt_lasso_univariate_matches_grid_oracle() {
        let (f, y) = univariate_instance();
        // Stationarity gives 3 b^2 - 6 b + 2 = 0, i.e. b = 1 - 1/sqrt(3).
        let fit = sqrt_lasso(&f, &y, 2.0, 1e-10, 10_000).unwrap();
        let analytic = 1.0 - 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(fit.coef.beta[0], analytic, epsilon = 1e-8);
        let grid = grid_minimizer(&f, &y, 2.0, Objective::SqrtLasso, -2.0, 2.0, 1e-4);
        assert!((fit.coef.beta[0] - grid).abs() <= 1e-4);
        assert!(fit.kkt_gap <= 1e-10);
    }

    #[test]
    fn sqrt_lasso_zero_at_origin_condition() {
        let (f, y) = univariate_instance();
        // |E_n[f y]| / rms(y) = 1/sqrt(2); zero iff lambda/n >= that.
        let lambda = 4.0 * (1.0 / 2.0_f64.sqrt()) * 1.0001;
        let fit = sqrt_lasso(&f, &y, lambda, 1e-10, 10_000).unwrap();
        assert_eq!(fit.coef.beta[0], 0.0);
    }

    #[test]
    fn sqrt_lasso_scale_equivariance() {
        let f = DMatrix::from_column_slice(6, 2, &[
            1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0,
        ]);
        let y = DVector::from_column_slice(&[2.0, 1.5, 0.5, -0.25, 0.75, -1.0]);
        let lambda = 3.0;
        let base = sqrt_lasso(&f, &y, lambda, 1e-11, 10_000).unwrap();
        let scaled = sqrt_lasso(&f, &(10.0 * &y), lambda, 1e-11, 10_000).unwrap();
        for j in 0..2 {
            assert_relative_eq!(scaled.coef.beta[j], 10.0 * base.coef.beta[j], max_relative = 1e-8);
        }
    }

    #[test]
    fn sqrt_lasso_rejects_zero_response() {
        let (f, _) = univariate_instance();
        assert!(matches!(
            sqrt_lasso(&f, &DVector::zeros(4), 1.0, 1e-8, 100),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn post_ols_univariate_closed_form() {
        // Orthogonal unit-mean-square columns: restricted OLS is E_n[f_1 y] on
        // the selected coordinate, zero elsewhere.
        let f = DMatrix::from_column_slice(4, 2, &[1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        let y = DVector::from_column_slice(&[2.0, 2.0, 0.0, 0.0]);
        let fit = post_ols(&f, &y, &[0], Method::PostLasso).unwrap();
        assert_relative_eq!(fit.coef.beta[0], 1.0, epsilon = 1e-12);
        assert_eq!(fit.coef.beta[1], 0.0);
        assert_eq!(fit.coef.support, vec![0]);
        // residual orthogonal to the selected column
        let r = &y - &fit.fitted;
        assert!(dot(col(&f, 0), r.as_slice()).abs() / 4.0 < 1e-10);
    }

    #[test]
    fn post_ols_full_support_is_ols() {
        let f = DMatrix::from_column_slice(4, 2, &[1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        let y = DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        let fit = post_ols(&f, &y, &[0, 1], Method::PostLasso).unwrap();
        let (coef, _) = crate::linalg::least_squares(&f, &y, &[0, 1]).unwrap();
        assert_relative_eq!(fit.coef.beta[0], coef[0], epsilon = 1e-12);
        assert_relative_eq!(fit.coef.beta[1], coef[1], epsilon = 1e-12);
    }

    #[test]
    fn post_ols_empty_support_is_distinguished_zero_fit() {
        let (f, y) = univariate_instance();
        let fit = post_ols(&f, &y, &[], Method::PostSqrtLasso).unwrap();
        assert!(fit.coef.support.is_empty());
        assert_eq!(fit.fitted, DVector::zeros(4));
        assert_eq!(fit.residual_rms, rms(y.as_slice()));
    }

    #[test]
    fn post_ols_duplicated_column_is_rank_deficient() {
        let f = DMatrix::from_column_slice(4, 2, &[1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0]);
        let y = DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            post_ols(&f, &y, &[0, 1], Method::PostLasso),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn kkt_check_certifies_and_rejects() {
        let (f, y) = univariate_instance();
        // exact soft-threshold solution
        let gap = kkt_check(&f, &y, &DVector::from_column_slice(&[0.75]), 2.0, Objective::Lasso).unwrap();
        assert!(gap <= 1e-12, "gap {gap}");
        // zero at a dominating lambda
        let gap0 = kkt_check(&f, &y, &DVector::zeros(1), 8.0, Objective::Lasso).unwrap();
        assert_eq!(gap0, 0.0);
        // OLS solution violates shrinkage at large lambda
        let ols = post_ols(&f, &y, &[0], Method::PostLasso).unwrap();
        let gap_ols = kkt_check(&f, &y, &ols.coef.beta, 8.0, Objective::Lasso).unwrap();
        assert!(gap_ols > 0.0);
    }

    #[test]
    fn kkt_check_perfect_fit_for_sqrt_lasso() {
        let (f, y) = univariate_instance();
        // beta = 1 fits only half the observations; use an exactly-fittable y
        let y_fit = DVector::from_column_slice(&[1.0, 1.0, -1.0, -1.0]);
        assert!(matches!(
            kkt_check(&f, &y_fit, &DVector::from_column_slice(&[1.0]), 1.0, Objective::SqrtLasso),
            Err(Error::PerfectFit)
        ));
        let _ = y;
    }

    #[test]
    fn lasso_duplicated_columns_unique_fitted_values() {
        // With duplicated columns the coefficient split is tie-broken by the
        // cycle order; fitted values are the unique object to assert on.
        let base = [1.0, 0.5, -1.0, -0.5, 1.0, -1.0];
        let nd = normalize(&DMatrix::from_column_slice(6, 1, &base));
        let f = DMatrix::from_columns(&[nd.column(0), nd.column(0)]);
        let y = DVector::from_column_slice(&[2.0, 1.0, 0.0, -1.0, 1.5, -0.5]);
        let fit_dup = lasso(&f, &y, 1.0, 1e-10, 10_000).unwrap();
        // Single-column problem at the same penalty: the duplicated problem's
        // fitted values must match (sum of coefficients plays the single role,
        // with the same effective threshold).
        let single = DMatrix::from_columns(&[nd.column(0)]);
        let fit_one = lasso(&single, &y, 1.0, 1e-10, 10_000).unwrap();
        for i in 0..6 {
            assert_relative_eq!(fit_dup.fitted[i], fit_one.fitted[i], epsilon = 1e-7);
        }
        fn normalize(m: &DMatrix<f64>) -> DMatrix<f64> {
            crate::model::normalize_columns(m).unwrap().f
        }
    }

    #[test]
    fn nonconvergence_carries_best_iterate() {
        let (f, y) = univariate_instance();
        match lasso(&f, &y, 2.0, 1e-14, 1) {
            Err(Error::NonConvergence { best, kkt_gap, .. }) => {
                assert!(best.coef.beta[0] != 0.0);
                assert!(kkt_gap.is_finite());
            }
            Ok(fit) => {
                // one sweep can already be exact on a univariate instance
                assert!(fit.kkt_gap <= 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
