//! Bounds on the traceless Ricci block coming from positive semidefiniteness.

use crate::error::{Error, Result};

/// `3(u − k)² − 3t² + ⟨w₊, w₋⟩`, an upper bound for `|C|²` whenever
/// `R − k·Id + t·* ⪰ 0`.
pub fn ricci_rhs(u: f64, wplus: &[f64; 3], wminus: &[f64; 3], k: f64, t: f64) -> f64 {
    let dot: f64 = wplus.iter().zip(wminus).map(|(a, b)| a * b).sum();
    3.0 * (u - k).powi(2) - 3.0 * t * t + dot
}

/// Largest `|C|²` for which `[[diag λ, Cᵀ], [C, diag μ]] ⪰ 0` can hold:
/// `Σ λᵢ μᵢ` with both sequences ascending.
pub fn schur_offdiag_bound(lam: &[f64], mu: &[f64]) -> Result<f64> {
    if lam.len() != mu.len() {
        return Err(Error::DimensionMismatch { expected: lam.len(), got: mu.len() });
    }
    for v in [lam, mu] {
        if v.iter().any(|&x| x < 0.0) {
            return Err(Error::NegativeEntry);
        }
        if v.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::NotSorted);
        }
    }
    Ok(lam.iter().zip(mu).map(|(a, b)| a * b).sum())
}
