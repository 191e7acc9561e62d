use nalgebra::DMatrix;

use super::{DenseMatrix, LinalgError};

/// Relative factor applied to `max|entry|` for the default rank tolerance.
pub const DEFAULT_RANK_RTOL: f64 = 1e-9;

pub fn default_rank_tol(a: &DenseMatrix) -> f64 {
    let scale = a.max_abs();
    if scale > 0.0 {
        DEFAULT_RANK_RTOL * scale
    } else {
        DEFAULT_RANK_RTOL
    }
}

/// Numerical rank by row-wise pivoted elimination.
pub fn rank(a: &DenseMatrix, tol: f64) -> usize {
    independent_rows(a, tol).len()
}

/// Indices of a maximal set of linearly independent rows, scanning rows in
/// order and keeping each one whose residual against the rows kept so far
/// exceeds `tol` in max-norm.
pub fn independent_rows(a: &DenseMatrix, tol: f64) -> Vec<usize> {
    let cols = a.cols();
    // reduced rows with their pivot column; each reduced row is zero at the
    // pivot columns of the rows kept before it
    let mut echelon: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut kept = Vec::new();
    let mut work = vec![0.0; cols];
    for i in 0..a.rows() {
        if echelon.len() == cols {
            break;
        }
        work.copy_from_slice(a.row(i));
        for (pivot, basis) in &echelon {
            let factor = work[*pivot] / basis[*pivot];
            if factor != 0.0 {
                for (w, b) in work.iter_mut().zip(basis) {
                    *w -= factor * b;
                }
                work[*pivot] = 0.0;
            }
        }
        let (pivot, peak) = work
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bj, bv), (j, v)| if v.abs() > bv { (j, v.abs()) } else { (bj, bv) });
        if peak > tol {
            echelon.push((pivot, work.clone()));
            kept.push(i);
        }
    }
    kept
}

fn to_nalgebra(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.entries())
}

/// Minimizes `‖A x − y‖₂` with a Householder QR factorization.
///
/// Requires `rows ≥ cols` and full column rank; a rank-deficient `A` is
/// reported as [`LinalgError::RankDeficient`] so callers can fall back to a
/// sparsity-regularized solve.
pub fn least_squares(a: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if y.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{} observations for {} rows",
            y.len(),
            a.rows()
        )));
    }
    if a.rows() < a.cols() {
        return Err(LinalgError::RankDeficient {
            rank: a.rows(),
            cols: a.cols(),
        });
    }
    if a.cols() == 0 {
        return Ok(Vec::new());
    }
    let qr = to_nalgebra(a).qr();
    let r = qr.r();
    let tol = default_rank_tol(a);
    let deficient = (0..a.cols()).filter(|&j| r[(j, j)].abs() <= tol).count();
    if deficient > 0 {
        return Err(LinalgError::RankDeficient {
            rank: a.cols() - deficient,
            cols: a.cols(),
        });
    }
    let qty = qr.q().transpose() * nalgebra::DVector::from_column_slice(y);
    let x = r
        .solve_upper_triangular(&qty)
        .ok_or(LinalgError::RankDeficient {
            rank: a.cols() - 1,
            cols: a.cols(),
        })?;
    Ok(x.iter().copied().collect())
}

/// Solves a square nonsingular system with partial-pivot LU.
pub fn solve_square(a: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != a.cols() || y.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} system with {} right-hand sides",
            a.rows(),
            a.cols(),
            y.len()
        )));
    }
    let lu = to_nalgebra(a).lu();
    lu.solve(&nalgebra::DVector::from_column_slice(y))
        .map(|x| x.iter().copied().collect())
        .ok_or(LinalgError::Singular)
}

pub fn inverse(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let inv = to_nalgebra(a).try_inverse().ok_or(LinalgError::Singular)?;
    let n = a.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = inv[(i, j)];
        }
    }
    Ok(out)
}
