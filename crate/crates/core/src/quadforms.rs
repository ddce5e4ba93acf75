//! Quadratic polynomials and the specific forms optimized over the Einstein
//! simplices and Ville cells.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues;

/// `Q(x) = c0 + b·x + xᵀ a x`; the Hessian is `2a`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    pub c0: f64,
    pub b: DVector<f64>,
    pub a: DMatrix<f64>,
}

impl QuadForm {
    pub fn new(c0: f64, b: DVector<f64>, a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != b.len() || a.ncols() != b.len() {
            return Err(Error::DimensionMismatch { expected: b.len(), got: a.nrows() });
        }
        if (&a - a.transpose()).amax() > 1e-14 {
            return Err(Error::BadParameter("quadratic part is not symmetric".into()));
        }
        Ok(QuadForm { c0, b, a })
    }

    fn from_upper(n: usize, c0: f64, lin: &[(usize, f64)], entries: &[(usize, usize, f64)]) -> Self {
        let mut a = DMatrix::zeros(n, n);
        for &(i, j, v) in entries {
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        let mut b = DVector::zeros(n);
        for &(i, v) in lin {
            b[i] = v;
        }
        QuadForm { c0, b, a }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.c0 + self.b.dot(x) + x.dot(&(&self.a * x))
    }

    pub fn eval_slice(&self, x: &[f64]) -> f64 {
        self.eval(&DVector::from_column_slice(x))
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x * 2.0 + &self.b
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        &self.a * 2.0
    }

    /// Eigenvalues of the Hessian `2a`, ascending.
    pub fn hessian_eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.hessian())
    }

    /// Eigenvalues of the form matrix `a` itself, ascending.
    pub fn form_eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.a)
    }

    pub fn negated(&self) -> Self {
        QuadForm { c0: -self.c0, b: -&self.b, a: -&self.a }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveLambda(lambda))
    }
}

/// Lower bound for I_λ on ℝ⁶ with coordinates `(w₁⁺, w₂⁺, w₁⁻, w₂⁻, u, t₁)`.
pub fn q_lambda(lambda: f64, delta: f64) -> Result<QuadForm> {
    check_lambda(lambda)?;
    let ap = (3.0 * lambda - 2.0) / (12.0 * lambda);
    let am = (3.0 * lambda + 2.0) / (12.0 * lambda);
    Ok(QuadForm::from_upper(
        6,
        -0.75 * delta * delta,
        &[(4, 1.5 * delta)],
        &[
            (0, 0, ap),
            (1, 1, ap),
            (0, 1, ap / 2.0),
            (2, 2, am),
            (3, 3, am),
            (2, 3, am / 2.0),
            (0, 2, -0.25),
            (1, 3, -0.25),
            (0, 3, -0.125),
            (1, 2, -0.125),
            (5, 5, 0.75),
        ],
    ))
}

/// The λ = ½ case written out term by term.
pub fn q_half(delta: f64) -> QuadForm {
    QuadForm::from_upper(
        6,
        -0.75 * delta * delta,
        &[(4, 1.5 * delta)],
        &[
            (0, 0, -1.0 / 12.0),
            (1, 1, -1.0 / 12.0),
            (0, 1, -1.0 / 24.0),
            (2, 2, 7.0 / 12.0),
            (3, 3, 7.0 / 12.0),
            (2, 3, 7.0 / 24.0),
            (0, 2, -0.25),
            (1, 3, -0.25),
            (0, 3, -0.125),
            (1, 2, -0.125),
            (5, 5, 0.75),
        ],
    )
}

/// `|W₊|² + η|W₋|²` on ℝ⁵ with coordinates `(w₁⁺, w₂⁺, w₁⁻, w₂⁻, u)`.
pub fn q_eta(eta: f64) -> Result<QuadForm> {
    if !(-1.0..=1.0).contains(&eta) {
        return Err(Error::EtaOutOfRange(eta));
    }
    Ok(QuadForm::from_upper(
        5,
        0.0,
        &[],
        &[(0, 0, 2.0), (1, 1, 2.0), (0, 1, 1.0), (2, 2, 2.0 * eta), (3, 3, 2.0 * eta), (2, 3, eta)],
    ))
}

/// The Einstein part of χ̲ on ℝ⁵.
pub fn q_euler() -> QuadForm {
    QuadForm::from_upper(
        5,
        0.0,
        &[],
        &[(0, 0, 0.25), (1, 1, 0.25), (0, 1, 0.125), (2, 2, 0.25), (3, 3, 0.25), (2, 3, 0.125), (4, 4, 0.75)],
    )
}

/// `m(x) = min(1 − x, x − δ)`.
pub fn ville_m(x: f64, delta: f64) -> f64 {
    (1.0 - x).min(x - delta)
}

/// F_λ evaluated directly from its piecewise definition.
pub fn f_ville_value(lambda: f64, delta: f64, v: &[f64; 3]) -> f64 {
    let s: f64 = v.iter().sum();
    let s2: f64 = v.iter().map(|x| x * x).sum();
    let m: Vec<f64> = v.iter().map(|&x| ville_m(x, delta)).collect();
    let ms: f64 = m.iter().sum();
    let m2: f64 = m.iter().map(|x| x * x).sum();
    (4.0 / (9.0 * lambda) - 1.0 / 3.0) * s * s + (2.0 - 4.0 / (3.0 * lambda)) * s2 - lambda / 2.0 * ms * ms - m2
}

/// F_λ expanded into an honest quadratic on cell `cell ∈ {1, 2, 3, 4}`.
///
/// On cell i the first `i − 1` coordinates use `m(v) = v − δ` and the rest
/// use `m(v) = 1 − v`.
pub fn f_ville(lambda: f64, delta: f64, cell: u8) -> Result<QuadForm> {
    check_lambda(lambda)?;
    if !(1..=4).contains(&cell) {
        return Err(Error::BadParameter(format!("Ville cell must be 1..4, got {cell}")));
    }
    let lower = usize::from(cell - 1);
    // m(vᵢ) = sᵢ·vᵢ + cᵢ
    let mut s = DVector::zeros(3);
    let mut c = DVector::zeros(3);
    for i in 0..3 {
        if i < lower {
            s[i] = 1.0;
            c[i] = -delta;
        } else {
            s[i] = -1.0;
            c[i] = 1.0;
        }
    }
    let alpha = 4.0 / (9.0 * lambda) - 1.0 / 3.0;
    let beta = 2.0 - 4.0 / (3.0 * lambda);
    let csum: f64 = c.iter().sum();
    let a = DMatrix::from_element(3, 3, alpha) + DMatrix::identity(3, 3) * (beta - 1.0) - &s * s.transpose() * (lambda / 2.0);
    let b = -&s * (lambda * csum) - s.component_mul(&c) * 2.0;
    let c0 = -lambda / 2.0 * csum * csum - c.dot(&c);
    QuadForm::new(c0, b, a)
}

/// Averaged sectional curvatures `vᵢ = u + wᵢ⁺/2` inside `[δ, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VillePoint {
    pub v: [f64; 3],
    pub delta: f64,
}

impl VillePoint {
    pub fn new(v: [f64; 3], delta: f64) -> Result<Self> {
        let tol = 1e-12;
        let ok = delta - tol <= v[0] && v[0] <= v[1] + tol && v[1] <= v[2] + tol && v[2] <= 1.0 + tol;
        if !ok {
            return Err(Error::BadParameter(format!("{v:?} is not an ordered point of [{delta}, 1]")));
        }
        Ok(VillePoint { v, delta })
    }

    /// Index of a cell containing the point (ties resolve to the lower index).
    pub fn cell(&self) -> u8 {
        let mid = (self.delta + 1.0) / 2.0;
        1 + self.v.iter().filter(|&&x| x < mid).count() as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-13 * (1.0 + b.abs())
    }

    #[test]
    fn q_lambda_half_matches_written_form() {
        for d in [0.05, 0.3, 0.7] {
            assert_eq!(q_lambda(0.5, d).unwrap(), q_half(d));
        }
    }

    #[test]
    fn q_lambda_rejects_nonpositive() {
        assert!(matches!(q_lambda(0.0, 0.3), Err(Error::NonPositiveLambda(_))));
        assert!(matches!(f_ville(-1.0, 0.3, 1), Err(Error::NonPositiveLambda(_))));
        assert!(matches!(q_eta(1.5), Err(Error::EtaOutOfRange(_))));
    }

    #[test]
    fn q_eta_vertex_values() {
        let q = q_eta(-0.5).unwrap();
        let d: f64 = 0.25;
        let p1 = [2.0 / 3.0 * (d - 1.0), 2.0 / 3.0 * (d - 1.0), 0.0, 0.0, (2.0 * d + 1.0) / 3.0];
        assert!(close(q.eval_slice(&p1), 8.0 / 3.0 * (1.0 - d).powi(2)));
        assert_eq!(q.eval_slice(&[0.0, 0.0, 0.0, 0.0, 1.0]), 0.0);
    }

    #[test]
    fn ville_expansion_matches_piecewise_definition() {
        for cell in 1..=4u8 {
            let d = 0.3;
            let mid = (d + 1.0) / 2.0;
            let q = f_ville(0.7, d, cell).unwrap();
            // a point strictly inside each cell
            let v = match cell {
                1 => [mid + 0.05, mid + 0.1, mid + 0.2],
                2 => [d + 0.1, mid + 0.1, mid + 0.2],
                3 => [d + 0.1, d + 0.2, mid + 0.2],
                _ => [d + 0.05, d + 0.1, d + 0.2],
            };
            assert_eq!(VillePoint::new(v, d).unwrap().cell(), cell);
            assert!(close(q.eval_slice(&v), f_ville_value(0.7, d, &v)));
        }
    }

    #[test]
    fn ville_point_validation() {
        assert!(VillePoint::new([0.3, 0.2, 0.5], 0.1).is_err());
        assert!(VillePoint::new([0.05, 0.2, 0.5], 0.1).is_err());
        assert!(VillePoint::new([0.1, 0.2, 1.0], 0.1).is_ok());
    }
}
