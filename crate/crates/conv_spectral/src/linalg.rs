//! Thin wrappers over faer's dense factorizations.

use faer::prelude::Solve;
use faer::{c64, Mat, Side};

use crate::exec::sync_linalg_threads;
use crate::SpectralError;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
/// Column `k` of the returned matrix is the eigenvector of `values[k]`.
pub fn sym_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>), SpectralError> {
    sync_linalg_threads();
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|e| SpectralError::Eigen(format!("{e:?}")))?;
    let values = (0..a.nrows()).map(|k| evd.S()[k]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>, SpectralError> {
    sync_linalg_threads();
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|e| SpectralError::Eigen(format!("{e:?}")))
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eigen(a: &Mat<c64>) -> Result<(Vec<f64>, Mat<c64>), SpectralError> {
    sync_linalg_threads();
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|e| SpectralError::Eigen(format!("{e:?}")))?;
    let values = (0..a.nrows()).map(|k| evd.S()[k].re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    llt: faer::linalg::solvers::Llt<f64>,
}

impl Cholesky {
    /// `None` when the matrix is not numerically positive definite.
    pub fn new(a: &Mat<f64>) -> Option<Self> {
        sync_linalg_threads();
        a.llt(Side::Lower).ok().map(|llt| Self { llt })
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &Mat<f64>) -> Mat<f64> {
        self.llt.solve(b)
    }
}

/// `(A + shift I)` for a square matrix.
pub fn add_diagonal(a: &Mat<f64>, shift: f64) -> Mat<f64> {
    let mut out = a.clone();
    for i in 0..a.nrows() {
        out[(i, i)] += shift;
    }
    out
}

/// Largest `|eigenvalue|` of a symmetric matrix.
pub fn sym_operator_norm(a: &Mat<f64>) -> Result<f64, SpectralError> {
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    Ok(sym_eigenvalues(a)?.into_iter().fold(0.0, |m, v| m.max(v.abs())))
}
