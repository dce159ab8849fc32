//! Symmetric eigenvalue helpers for Gram-matrix checks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Smallest eigenvalue of a symmetric matrix and its eigenvector.
pub fn min_eigenpair(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    (val, eig.eigenvectors.column(idx).into_owned())
}

/// `Σ_j Σ_k m_jk ρ_j ρ_k`.
pub fn quadratic_form(m: &DMatrix<f64>, rho: &DVector<f64>) -> f64 {
    rho.dot(&(m * rho))
}
