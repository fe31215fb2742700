//! Closed-form spectral decomposition of a uniform correlation matrix.

use nalgebra::DMatrix;

use crate::channel::uniform_rho_lower_bound;
use crate::error::{Error, Result};

/// Returns `(lambda, Q)` with `R = Q diag(lambda) Q^T`.
///
/// The first `M - 1` eigenvalues equal `1 - rho`; the last is
/// `1 + (M - 1) rho` with eigenvector `1 / sqrt(M)`. Row `j` of `Q^T`
/// (1-based, `j < M`) is `-1/sqrt(j(j+1))` in column 1, `j/sqrt(j(j+1))` in
/// column `M - j + 1`, `-1/sqrt(j(j+1))` in the columns after it, and zero
/// elsewhere.
pub fn uniform_eigen(m: usize, rho: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if m == 0 {
        return Err(Error::OutOfRange { name: "M", value: 0.0 });
    }
    let lo = uniform_rho_lower_bound(m) * (1.0 + 4.0 * f64::EPSILON);
    if !(rho >= lo && rho <= 1.0) {
        return Err(Error::OutOfRange {
            name: "rho",
            value: rho,
        });
    }
    let mf = m as f64;
    let mut lambda = vec![1.0 - rho; m];
    lambda[m - 1] = 1.0 + (mf - 1.0) * rho;

    let mut qt = DMatrix::zeros(m, m);
    for j in 1..m {
        let row = j - 1;
        let norm = ((j * (j + 1)) as f64).sqrt();
        let pivot = m - j;
        qt[(row, 0)] = -1.0 / norm;
        qt[(row, pivot)] = j as f64 / norm;
        for col in pivot + 1..m {
            qt[(row, col)] = -1.0 / norm;
        }
    }
    for col in 0..m {
        qt[(m - 1, col)] = 1.0 / mf.sqrt();
    }
    Ok((lambda, qt.transpose()))
}
