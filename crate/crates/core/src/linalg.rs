//! Small dense helpers shared by the polytope and optimizer code.

use nalgebra::{DMatrix, DVector};

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Orthonormal basis (as columns) of the span of `vectors`, by modified
/// Gram-Schmidt with one reorthogonalization pass. A vector whose residual
/// falls below `pivot_tol` times its original norm is dropped.
pub fn orthonormal_basis(vectors: &[DVector<f64>], dim: usize, pivot_tol: f64) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&r);
                r -= b * p;
            }
        }
        let n = r.norm();
        if n > pivot_tol * scale.max(1.0) {
            basis.push(r / n);
        }
    }
    let mut out = DMatrix::zeros(dim, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Frobenius-type scale used for relative definiteness thresholds.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
