//! Algebraic curvature operators of 4-manifolds in canonical block form.
//!
//! An operator on Λ²ℝ⁴ = Λ²₊ ⊕ Λ²₋ is stored as
//!
//! ```text
//!     R = [ u·Id + W₊    Cᵀ       ]
//!         [ C            u·Id + W₋ ]
//! ```
//!
//! with W± diagonal, traceless and sorted ascending. The Hodge star is
//! `* = diag(Id₃, -Id₃)` in the same basis.

use nalgebra::{Matrix3, Matrix6, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tracelessness violations beyond this are rejected by [`make_operator`].
pub const TRACE_TOL: f64 = 1e-9;
/// Default PSD tolerance for certificates.
pub const DEFAULT_TOL: f64 = 1e-9;

const GOLDEN_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurvOpJson", into = "CurvOpJson")]
pub struct CurvOp {
    pub u: f64,
    pub wplus: [f64; 3],
    pub wminus: [f64; 3],
    /// `c[i][j]`: row i indexes Λ²₋, column j indexes Λ²₊.
    pub c: [[f64; 3]; 3],
}

#[derive(Serialize, Deserialize)]
struct CurvOpJson {
    u: f64,
    wplus: [f64; 3],
    wminus: [f64; 3],
    c: [f64; 9],
}

impl TryFrom<CurvOpJson> for CurvOp {
    type Error = Error;
    fn try_from(j: CurvOpJson) -> Result<Self> {
        let mut c = [[0.0; 3]; 3];
        for (i, row) in c.iter_mut().enumerate() {
            row.copy_from_slice(&j.c[3 * i..3 * i + 3]);
        }
        make_operator(j.u, j.wplus, j.wminus, c)
    }
}

impl From<CurvOp> for CurvOpJson {
    fn from(r: CurvOp) -> Self {
        let mut c = [0.0; 9];
        for i in 0..3 {
            c[3 * i..3 * i + 3].copy_from_slice(&r.c[i]);
        }
        CurvOpJson { u: r.u, wplus: r.wplus, wminus: r.wminus, c }
    }
}

/// A 2-plane `(H + K)/√2` given by its self-dual and anti-self-dual parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bivector {
    pub h: [f64; 3],
    pub k: [f64; 3],
}

/// Result of the Finsler-Thorpe feasibility search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub feasible: bool,
    /// Feasible, but at least one margin lies in `[-tol, 0)`.
    pub boundary: bool,
    pub t1: f64,
    pub t2: f64,
    /// λ_min(±R − δ·Id + t₁·*).
    pub margin1: f64,
    /// λ_min(Id ∓ R + t₂·*).
    pub margin2: f64,
    /// +1 if R was certified, -1 if −R was.
    pub sign: i8,
}

/// Builds a canonical operator: sorts W± ascending (permuting C to match)
/// and removes round-off from their traces.
pub fn make_operator(u: f64, wplus: [f64; 3], wminus: [f64; 3], c: [[f64; 3]; 3]) -> Result<CurvOp> {
    for w in [&wplus, &wminus] {
        let s: f64 = w.iter().sum();
        if !s.is_finite() || s.abs() > TRACE_TOL {
            return Err(Error::NonTraceless { sum: s });
        }
    }
    let sp = sort_perm(&wplus);
    let sm = sort_perm(&wminus);
    let mut wp = [0.0; 3];
    let mut wm = [0.0; 3];
    let mut cc = [[0.0; 3]; 3];
    for i in 0..3 {
        wp[i] = wplus[sp[i]];
        wm[i] = wminus[sm[i]];
        for j in 0..3 {
            cc[i][j] = c[sm[i]][sp[j]];
        }
    }
    Ok(CurvOp { u, wplus: detrace(wp), wminus: detrace(wm), c: cc })
}

fn sort_perm(w: &[f64; 3]) -> [usize; 3] {
    let mut p = [0, 1, 2];
    p.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
    p
}

fn detrace(w: [f64; 3]) -> [f64; 3] {
    let m = (w[0] + w[1] + w[2]) / 3.0;
    [w[0] - m, w[1] - m, w[2] - m]
}

impl CurvOp {
    /// Curvature operator of the unit round sphere.
    pub fn identity() -> Self {
        CurvOp { u: 1.0, wplus: [0.0; 3], wminus: [0.0; 3], c: [[0.0; 3]; 3] }
    }

    /// Fubini-Study ℂP² normalized so that 1 ≤ sec ≤ 4.
    pub fn complex_projective_plane() -> Self {
        CurvOp { u: 2.0, wplus: [-2.0, -2.0, 4.0], wminus: [0.0; 3], c: [[0.0; 3]; 3] }
    }

    /// Einstein operator from the chart `(w₁⁺, w₂⁺, w₁⁻, w₂⁻, u)`, with
    /// `w₃± = −w₁± − w₂±`.
    pub fn from_einstein_coords(x: &[f64]) -> Result<Self> {
        if x.len() < 5 {
            return Err(Error::DimensionMismatch { expected: 5, got: x.len() });
        }
        make_operator(
            x[4],
            [x[0], x[1], -x[0] - x[1]],
            [x[2], x[3], -x[2] - x[3]],
            [[0.0; 3]; 3],
        )
    }

    pub fn matrix(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        for i in 0..3 {
            m[(i, i)] = self.u + self.wplus[i];
            m[(i + 3, i + 3)] = self.u + self.wminus[i];
            for j in 0..3 {
                m[(i + 3, j)] = self.c[i][j];
                m[(j, i + 3)] = self.c[i][j];
            }
        }
        m
    }

    pub fn c_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.c[i][j])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().flatten().for_each(|x| *x *= s);
        let sc = |w: [f64; 3]| [w[0] * s, w[1] * s, w[2] * s];
        // A negative factor reverses the eigenvalue order.
        let (wp, wm) = (sc(self.wplus), sc(self.wminus));
        if s < 0.0 {
            make_operator(self.u * s, wp, wm, c).expect("scaling preserves tracelessness")
        } else {
            CurvOp { u: self.u * s, wplus: wp, wminus: wm, c }
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Same operator seen with the opposite orientation: Λ²₊ and Λ²₋ swap.
    pub fn reverse_orientation(&self) -> Self {
        let mut ct = [[0.0; 3]; 3];
        for (i, row) in ct.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.c[j][i];
            }
        }
        CurvOp { u: self.u, wplus: self.wminus, wminus: self.wplus, c: ct }
    }

    pub fn wplus_norm_sq(&self) -> f64 {
        self.wplus.iter().map(|x| x * x).sum()
    }

    pub fn wminus_norm_sq(&self) -> f64 {
        self.wminus.iter().map(|x| x * x).sum()
    }

    pub fn c_norm_sq(&self) -> f64 {
        self.c.iter().flatten().map(|x| x * x).sum()
    }

    /// Spectral norm of the 6×6 operator.
    pub fn operator_norm(&self) -> f64 {
        self.matrix().symmetric_eigenvalues().iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }
}

/// Pointwise Gauss-Bonnet integrand χ̲(R).
pub fn euler_form(r: &CurvOp) -> f64 {
    (6.0 * r.u * r.u + r.wplus_norm_sq() + r.wminus_norm_sq() - 2.0 * r.c_norm_sq()) / 8.0
}

/// Pointwise signature integrand σ̲(R).
pub fn signature_form(r: &CurvOp) -> f64 {
    (r.wplus_norm_sq() - r.wminus_norm_sq()) / 12.0
}

/// I_λ(R) = χ̲(R) − σ̲(R)/λ.
pub fn i_lambda(r: &CurvOp, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    Ok(euler_form(r) - signature_form(r) / lambda)
}

/// Sectional curvature of the plane `(H + K)/√2`.
pub fn sec(r: &CurvOp, plane: &Bivector) -> Result<f64> {
    let h = Vector3::from(plane.h);
    let k = Vector3::from(plane.k);
    let (hn, kn) = (h.norm(), k.norm());
    if (hn - 1.0).abs() > 1e-12 || (kn - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitPlane { h: hn, k: kn });
    }
    let mut hh = 0.0;
    let mut kk = 0.0;
    for i in 0..3 {
        hh += (r.u + r.wplus[i]) * h[i] * h[i];
        kk += (r.u + r.wminus[i]) * k[i] * k[i];
    }
    let kch = k.dot(&(r.c_matrix() * h));
    Ok(0.5 * (hh + kk + 2.0 * kch))
}

/// Einstein projection: drops the traceless Ricci block.
pub fn project_einstein(r: &CurvOp) -> CurvOp {
    CurvOp { c: [[0.0; 3]; 3], ..*r }
}

fn hodge_shift(m: &Matrix6<f64>, t: f64) -> Matrix6<f64> {
    let mut out = *m;
    for i in 0..3 {
        out[(i, i)] += t;
        out[(i + 3, i + 3)] -= t;
    }
    out
}

fn lambda_min(m: &Matrix6<f64>) -> f64 {
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Maximizes the concave map t ↦ λ_min(m + t·*) on [-radius, radius].
///
/// The map is 1-Lipschitz, so once `best + width < floor` the maximum is
/// known to lie below `floor` and the search returns `None`.
fn maximize_min_eig(m: &Matrix6<f64>, radius: f64, floor: f64) -> Option<(f64, f64)> {
    let f = |t: f64| lambda_min(&hodge_shift(m, t));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-radius, radius);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let stop = 1e-13 * radius.max(1.0);
    for _ in 0..GOLDEN_MAX_ITERS {
        if b - a < stop {
            break;
        }
        if f1.max(f2) + (b - a) < floor {
            return None;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let tm = 0.5 * (a + b);
    let fm = f(tm);
    Some(
        [(tm, fm), (x1, f1), (x2, f2)]
            .into_iter()
            .fold((tm, fm), |best, c| if c.1 > best.1 { c } else { best }),
    )
}

/// Certificate for one orientation of the operator: `sign = 1` tests R,
/// `sign = -1` tests −R.
pub fn certify_sign(r: &CurvOp, delta: f64, tol: f64, sign: i8) -> Result<Certificate> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::BadDelta(delta));
    }
    let rm = r.matrix() * f64::from(sign);
    let id = Matrix6::<f64>::identity();
    let radius = r.operator_norm() + delta + 1.0;
    let (t1, margin1) = maximize_min_eig(&(rm - id * delta), radius, f64::NEG_INFINITY).expect("no floor");
    let (t2, margin2) = maximize_min_eig(&(id - rm), radius, f64::NEG_INFINITY).expect("no floor");
    let feasible = margin1 >= -tol && margin2 >= -tol;
    Ok(Certificate {
        feasible,
        boundary: feasible && margin1.min(margin2) < 0.0,
        t1,
        t2,
        margin1,
        margin2,
        sign,
    })
}

/// Same decision as `certify_sign(..).feasible`, but infeasible operators
/// return `None` as soon as the search proves it.
pub fn certify_sign_fast(r: &CurvOp, delta: f64, tol: f64, sign: i8) -> Result<Option<Certificate>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::BadDelta(delta));
    }
    let rm = r.matrix() * f64::from(sign);
    let id = Matrix6::<f64>::identity();
    let radius = r.operator_norm() + delta + 1.0;
    let Some((t1, margin1)) = maximize_min_eig(&(rm - id * delta), radius, -tol) else {
        return Ok(None);
    };
    if margin1 < -tol {
        return Ok(None);
    }
    let Some((t2, margin2)) = maximize_min_eig(&(id - rm), radius, -tol) else {
        return Ok(None);
    };
    if margin2 < -tol {
        return Ok(None);
    }
    Ok(Some(Certificate { feasible: true, boundary: margin1.min(margin2) < 0.0, t1, t2, margin1, margin2, sign }))
}

/// Finsler-Thorpe test for δ-pinching of R or −R.
pub fn pinch_certificate(r: &CurvOp, delta: f64, tol: f64) -> Result<Certificate> {
    let pos = certify_sign(r, delta, tol, 1)?;
    if pos.feasible {
        return Ok(pos);
    }
    let neg = certify_sign(r, delta, tol, -1)?;
    if neg.feasible || neg.margin1.min(neg.margin2) > pos.margin1.min(pos.margin2) {
        Ok(neg)
    } else {
        Ok(pos)
    }
}

/// Smallest eigenvalue of `±R − δ·Id + t·*` (`upper = false`) or
/// `Id ∓ R + t·*` (`upper = true`); used to check a proposed certificate.
pub fn certificate_margin(r: &CurvOp, delta: f64, t: f64, sign: i8, upper: bool) -> f64 {
    let rm = r.matrix() * f64::from(sign);
    let id = Matrix6::<f64>::identity();
    let base = if upper { id - rm } else { rm - id * delta };
    lambda_min(&hodge_shift(&base, t))
}
