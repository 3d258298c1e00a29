//! Error type shared across the crate.

use crate::solvers::FirstStageFit;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Column has empirical second moment below the normalization floor (1e-14).
    #[error("column {0} has (near-)zero empirical second moment")]
    ZeroColumn(usize),

    /// A solver was handed a design whose columns are not unit mean-square.
    #[error("column {col} is not normalized: mean-square {msq} deviates from 1 by more than 1e-8")]
    NotNormalized { col: usize, msq: f64 },

    /// Coordinate descent ran out of sweeps. Carries the best iterate so the
    /// caller can inspect or accept it.
    #[error("solver did not converge in {max_iter} sweeps (kkt gap {kkt_gap:.3e})")]
    NonConvergence {
        max_iter: usize,
        kkt_gap: f64,
        best: Box<FirstStageFit>,
    },

    /// Residual sum of squares vanished; the sqrt-LASSO stationarity system
    /// is undefined at a perfect fit.
    #[error("residual mean-square below 1e-14: sqrt-lasso optimality certificate undefined")]
    PerfectFit,

    /// Selected columns are collinear. Carries the offending support.
    #[error("rank-deficient selection: columns {0:?}")]
    RankDeficient(Vec<usize>),

    /// A solved linear system had condition number above 1e12.
    #[error("singular or ill-conditioned system (condition number {0:.3e})")]
    SingularSystem(f64),

    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),

    /// Exact sparse-eigenvalue enumeration was requested beyond the subset cap.
    #[error("C({p},{m}) subsets exceed the enumeration cap {cap}")]
    TooLarge { p: usize, m: usize, cap: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Violation of the CSV ingestion contract or a malformed data file.
    #[error("data contract violation: {0}")]
    DataContract(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
