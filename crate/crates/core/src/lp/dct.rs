use std::f64::consts::PI;

use super::{DenseMatrix, LinalgError};

/// Orthonormal DCT-II matrix: `C = φ x` gives the cosine coefficients of
/// `x`, and `φᵀ` is its inverse.
pub fn dct_matrix(n: usize) -> Result<DenseMatrix, LinalgError> {
    if n == 0 {
        return Err(LinalgError::DimensionMismatch("DCT of size 0".into()));
    }
    let nf = n as f64;
    let mut phi = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for i in 0..n {
            phi[(k, i)] = scale * (PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos();
        }
    }
    Ok(phi)
}
