//! Instrumental-variables estimation with many instruments.
//!
//! Estimates the linear IV model `y1 = alpha_1 y2 + w'alpha_2 + eps` where the
//! endogenous regressor `y2 = D(x) + v` depends on a possibly very large set
//! of technical instruments (p >> n allowed). The optimal instrument `D(x)`
//! is fit by sparse first-stage regression — LASSO, sqrt-LASSO, and their
//! post-selection OLS refits — with data-driven penalty levels, then plugged
//! into a second-stage IV estimator. Benchmarks (2SLS on all instruments,
//! Fuller's k-class), a split-sample cross-fitted variant, Gram-matrix
//! diagnostics, and a Monte Carlo harness round out the toolkit.
//!
//! Modules:
//! - [`model`]: dataset types, column normalization, CSV ingestion.
//! - [`solvers`]: penalized first-stage solvers with KKT certificates.
//! - [`penalty`]: simulated score quantiles, plug-in rules, sigma_v
//!   estimation, cross-validation.
//! - [`iv`]: second-stage estimators and variance estimation.
//! - [`diagnostics`]: sparse and restricted eigenvalues of the Gram matrix.
//! - [`montecarlo`]: simulation designs, replication engine, metric
//!   aggregation.
//! - [`cli`]: the `sparseiv` command-line front end.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod iv;
pub(crate) mod linalg;
pub mod model;
pub mod montecarlo;
pub mod penalty;
pub mod solvers;
pub mod stream;

pub use error::{Error, Result};
