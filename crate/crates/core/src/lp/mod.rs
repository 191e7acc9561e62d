//! Dense numerical kernel: the standard-form LP solver, least squares,
//! numerical rank and the orthonormal DCT basis.

mod dct;
mod linalg;
mod matrix;
mod simplex;

use thiserror::Error;

pub use dct::dct_matrix;
pub use linalg::{default_rank_tol, independent_rows, inverse, least_squares, rank, solve_square, DEFAULT_RANK_RTOL};
pub use matrix::DenseMatrix;
pub use simplex::{solve_lp, LpProblem, LpSolution, LpStatus, DEFAULT_FEAS_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is rank deficient (rank {rank} < {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("feasibility tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("simplex iteration limit reached after {iterations} pivots")]
    IterationLimit { iterations: usize },
    #[error("numerical breakdown: constraint residual {residual:e} after refinement")]
    NumericalBreakdown { residual: f64 },
}
