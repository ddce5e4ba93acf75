//! Extremizing a quadratic over a polytope by face enumeration.
//!
//! If the Hessian of Q has `d` eigenvalues of the sign adverse to the
//! optimization sense, the optimum is attained in the relative interior of
//! a face of dimension at most `d` on which Q restricts to a definite form
//! of the favorable sign, at that face's unique critical point. Vertices are
//! always candidates.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, orthonormal_basis, sym_eigenvalues};
use crate::polytopes::{Polytope, PolytopeKind};
use crate::quadforms::QuadForm;

/// Barycentric coordinates must exceed this for a critical point to count
/// as relatively interior.
pub const RELINT_TOL: f64 = 1e-9;
const DEFINITE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Definiteness {
    /// 0-dimensional face.
    Vacuous,
    Positive,
    Negative,
    Indefinite,
}

impl Definiteness {
    fn favors(self, sense: Sense) -> bool {
        matches!(
            (self, sense),
            (Definiteness::Vacuous, _) | (Definiteness::Positive, Sense::Min) | (Definiteness::Negative, Sense::Max)
        )
    }
}

/// Q restricted to the affine hull of one face.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictedForm {
    pub face: Vec<usize>,
    pub dim: usize,
    /// Hessian eigenvalues in an orthonormal basis of the face directions.
    pub hess_eigs: Vec<f64>,
    /// Hessian eigenvalues in the edge chart `x = v₀ + Σ sⱼ (vⱼ − v₀)`
    /// based at the lowest-index vertex.
    pub chart_hess_eigs: Vec<f64>,
    pub definiteness: Definiteness,
    pub critical_point: Option<Vec<f64>>,
    /// Only for simplicial faces.
    pub critical_bary: Option<Vec<f64>>,
    pub value_at_critical: Option<f64>,
    /// Critical point exists and lies in the relative interior with margin
    /// [`RELINT_TOL`].
    pub in_relint: bool,
}

impl RestrictedForm {
    /// Critical point exists and lies strictly inside the face (no margin).
    pub fn strictly_interior(&self) -> bool {
        match (&self.critical_bary, self.dim) {
            (_, 0) => true,
            (Some(b), _) => b.iter().all(|&x| x > 0.0),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub point: Vec<f64>,
    pub face: Vec<usize>,
    pub sense: Sense,
    /// Every face whose critical point was a valid candidate, with its value.
    pub candidates: Vec<(Vec<usize>, f64)>,
}

fn check_dims(q: &QuadForm, p: &Polytope) -> Result<()> {
    if q.dim() != p.dim_ambient {
        return Err(Error::DimensionMismatch { expected: p.dim_ambient, got: q.dim() });
    }
    Ok(())
}

fn classify(eigs: &[f64], scale: f64) -> Definiteness {
    if eigs.is_empty() {
        return Definiteness::Vacuous;
    }
    let thr = DEFINITE_REL * (1.0 + scale);
    if eigs.iter().all(|&e| e > thr) {
        Definiteness::Positive
    } else if eigs.iter().all(|&e| e < -thr) {
        Definiteness::Negative
    } else {
        Definiteness::Indefinite
    }
}

/// Restriction of `q` to the affine hull of `face` at the given δ.
pub fn restrict(q: &QuadForm, p: &Polytope, face: &[usize], delta: f64) -> Result<RestrictedForm> {
    check_dims(q, p)?;
    let lf = p.find_face(face).ok_or_else(|| Error::NotAFace(face.to_vec()))?;
    let vs = p.vertex_coords(delta);
    let idx = &lf.vertices;
    let v0 = vs[idx[0]].clone();
    let h = q.hessian();
    let hscale = max_abs(&h);

    if lf.dim == 0 {
        return Ok(RestrictedForm {
            face: idx.clone(),
            dim: 0,
            hess_eigs: vec![],
            chart_hess_eigs: vec![],
            definiteness: Definiteness::Vacuous,
            critical_point: Some(v0.iter().copied().collect()),
            critical_bary: Some(vec![1.0]),
            value_at_critical: Some(q.eval(&v0)),
            in_relint: true,
        });
    }

    let edges: Vec<DVector<f64>> = idx[1..].iter().map(|&j| &vs[j] - &v0).collect();
    let basis = orthonormal_basis(&edges, p.dim_ambient, 1e-12);
    let hb = basis.transpose() * &h * &basis;
    let hess_eigs = sym_eigenvalues(&hb);

    // Edge chart: the first `dim` edges that are independent.
    let mut chart_cols: Vec<DVector<f64>> = Vec::new();
    for e in &edges {
        let mut trial = chart_cols.clone();
        trial.push(e.clone());
        if orthonormal_basis(&trial, p.dim_ambient, 1e-12).ncols() == trial.len() {
            chart_cols = trial;
        }
        if chart_cols.len() == lf.dim {
            break;
        }
    }
    let chart = DMatrix::from_columns(&chart_cols);
    let chart_hess_eigs = sym_eigenvalues(&(chart.transpose() * &h * &chart));

    let definiteness = classify(&hess_eigs, hscale);
    let mut out = RestrictedForm {
        face: idx.clone(),
        dim: lf.dim,
        hess_eigs,
        chart_hess_eigs,
        definiteness,
        critical_point: None,
        critical_bary: None,
        value_at_critical: None,
        in_relint: false,
    };
    if definiteness == Definiteness::Indefinite {
        return Ok(out);
    }

    let g = basis.transpose() * q.gradient(&v0);
    let Some(y) = hb.clone().lu().solve(&(-g)) else {
        return Ok(out);
    };
    let x = &v0 + &basis * y;
    out.value_at_critical = Some(q.eval(&x));

    if idx.len() == lf.dim + 1 {
        let s = (chart.transpose() * &chart).lu().solve(&(chart.transpose() * (&x - &v0)));
        if let Some(s) = s {
            let mut bary = Vec::with_capacity(idx.len());
            bary.push(1.0 - s.sum());
            bary.extend(s.iter().copied());
            out.in_relint = bary.iter().all(|&b| b > RELINT_TOL);
            out.critical_bary = Some(bary);
        }
    } else {
        out.in_relint = interior_by_facets(p, idx, &x, delta);
    }
    out.critical_point = Some(x.iter().copied().collect());
    Ok(out)
}

/// Relative interior test for non-simplicial faces: strictly inside every
/// facet inequality that is not tight on the whole face.
fn interior_by_facets(p: &Polytope, face: &[usize], x: &DVector<f64>, delta: f64) -> bool {
    if p.dim_ambient != 3 || matches!(p.kind, PolytopeKind::Simplex) {
        return false;
    }
    let vs = p.vertex_coords(delta);
    let pt = nalgebra::Vector3::new(x[0], x[1], x[2]);
    p.facet_inequalities(delta).iter().all(|(n, hval)| {
        let tight = face.iter().all(|&j| {
            let v = nalgebra::Vector3::new(vs[j][0], vs[j][1], vs[j][2]);
            (n.dot(&v) - hval).abs() < 1e-12
        });
        tight || n.dot(&pt) < hval - RELINT_TOL
    })
}

/// Number of Hessian eigenvalues whose sign lets interior critical points
/// compete: negative ones for maximization, positive ones for minimization.
pub fn adverse_count(q: &QuadForm, sense: Sense) -> usize {
    let h = q.hessian();
    let thr = DEFINITE_REL * (1.0 + max_abs(&h));
    let ev = sym_eigenvalues(&h);
    match sense {
        Sense::Max => ev.iter().filter(|&&e| e < -thr).count(),
        Sense::Min => ev.iter().filter(|&&e| e > thr).count(),
    }
}

/// Global extremum of `q` over `p` at the given δ.
pub fn optimize(q: &QuadForm, p: &Polytope, sense: Sense, delta: f64) -> Result<Extremum> {
    check_dims(q, p)?;
    if p.vertices.is_empty() {
        return Err(Error::BadParameter("empty polytope".into()));
    }
    let d = adverse_count(q, sense).min(p.dim());
    let faces: Vec<&Vec<usize>> = p.faces.iter().filter(|f| f.dim <= d).map(|f| &f.vertices).collect();
    let results: Vec<Option<(Vec<usize>, f64, Vec<f64>)>> = faces
        .par_iter()
        .map(|f| {
            let rf = restrict(q, p, f, delta).ok()?;
            if !(rf.definiteness.favors(sense) && rf.in_relint) {
                return None;
            }
            Some((rf.face, rf.value_at_critical?, rf.critical_point?))
        })
        .collect();

    let mut best: Option<(Vec<usize>, f64, Vec<f64>)> = None;
    let mut candidates = Vec::new();
    for (face, value, point) in results.into_iter().flatten() {
        candidates.push((face.clone(), value));
        let better = match &best {
            None => true,
            Some((_, bv, _)) => match sense {
                Sense::Min => value < *bv,
                Sense::Max => value > *bv,
            },
        };
        if better {
            best = Some((face, value, point));
        }
    }
    let (face, value, point) = best.expect("vertices are always candidates");
    Ok(Extremum { value, point, face, sense, candidates })
}

/// Which boolean a threshold scan tracks along δ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanPredicate {
    /// The face's critical point exists and lies strictly inside the face.
    Relint,
    /// The restricted critical value is nonnegative.
    Sign,
}

/// Bisection on δ for the point where `pred` changes value, to width 1e-11.
pub fn bisect_predicate<F>(mut pred: F, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    let (mut a, mut b) = (lo, hi);
    let pa = pred(a)?;
    if pa == pred(b)? {
        return Err(Error::NoSignChange { lo, hi });
    }
    while b - a > 1e-11 {
        let m = 0.5 * (a + b);
        if pred(m)? == pa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// δ at which a face's critical point enters/leaves the relative interior
/// (or its critical value changes sign) within `[lo, hi]`.
pub fn threshold_scan<F>(family: F, predicate: ScanPredicate, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(QuadForm, Polytope, Vec<usize>)>,
{
    bisect_predicate(
        |d| {
            let (q, p, face) = family(d)?;
            let rf = restrict(&q, &p, &face, d)?;
            Ok(match predicate {
                ScanPredicate::Relint => rf.critical_point.is_some() && rf.strictly_interior(),
                ScanPredicate::Sign => rf.value_at_critical.is_some_and(|v| v >= 0.0),
            })
        },
        lo,
        hi,
    )
}

/// Maximal subintervals of `[lo, hi]` on which `pred` holds: sign changes
/// are located on a uniform grid of `grid` points, then bisected.
pub fn predicate_intervals<F>(mut pred: F, lo: f64, hi: f64, grid: usize) -> Result<Vec<(f64, f64)>>
where
    F: FnMut(f64) -> Result<bool>,
{
    let grid = grid.max(2);
    let xs: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
    let vals = xs.iter().map(|&x| pred(x)).collect::<Result<Vec<bool>>>()?;
    let mut out = Vec::new();
    let mut start = if vals[0] { Some(lo) } else { None };
    for i in 1..grid {
        if vals[i] == vals[i - 1] {
            continue;
        }
        let x = bisect_predicate(&mut pred, xs[i - 1], xs[i])?;
        if vals[i] {
            start = Some(x);
        } else if let Some(a) = start.take() {
            out.push((a, x));
        }
    }
    if let Some(a) = start {
        out.push((a, hi));
    }
    Ok(out)
}

/// Windows of δ in (0, 1) where `predicate` holds for the face family.
/// Windows reaching the sampled ends `1e-9` and `1 − 1e-9` are reported as
/// starting at 0 or ending at 1.
pub fn threshold_windows<F>(family: F, predicate: ScanPredicate) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<(QuadForm, Polytope, Vec<usize>)>,
{
    let (lo, hi) = (1e-9, 1.0 - 1e-9);
    let pred = |d: f64| -> Result<bool> {
        let (q, p, face) = family(d)?;
        let rf = restrict(&q, &p, &face, d)?;
        Ok(match predicate {
            ScanPredicate::Relint => rf.critical_point.is_some() && rf.strictly_interior(),
            ScanPredicate::Sign => rf.value_at_critical.is_some_and(|v| v >= 0.0),
        })
    };
    let mut w = predicate_intervals(pred, lo, hi, 400)?;
    for (a, b) in w.iter_mut() {
        if *a == lo {
            *a = 0.0;
        }
        if *b == hi {
            *b = 1.0;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytopes::{einstein_simplex, ville_cells};
    use crate::quadforms::{f_ville, q_euler, q_half};

    #[test]
    fn vertex_restriction() {
        let p = einstein_simplex(0.3, 6).unwrap();
        let rf = restrict(&q_half(0.3), &p, &[4], 0.3).unwrap();
        assert_eq!(rf.dim, 0);
        assert!((rf.value_at_critical.unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn not_a_face() {
        let p = ville_cells(0.3).unwrap().remove(1);
        let q = f_ville(0.5, 0.3, 2).unwrap();
        assert!(matches!(restrict(&q, &p, &[0, 4], 0.3), Err(Error::NotAFace(_))));
        let d6 = einstein_simplex(0.3, 6).unwrap();
        assert!(matches!(restrict(&q_half(0.3), &d6, &[1, 1], 0.3), Err(Error::NotAFace(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let p = einstein_simplex(0.3, 6).unwrap();
        assert!(matches!(optimize(&q_euler(), &p, Sense::Max, 0.3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn convex_max_sits_on_vertex() {
        let p = einstein_simplex(0.4, 5).unwrap();
        let e = optimize(&q_euler(), &p, Sense::Max, 0.4).unwrap();
        assert_eq!(e.face, vec![4]);
        assert!((e.value - 0.75).abs() < 1e-15);
        assert_eq!(e.candidates.len(), 6);
    }

    #[test]
    fn intervals_of_a_window() {
        let w = predicate_intervals(|d| Ok(d > 0.25 && d < 0.6), 0.0, 1.0, 50).unwrap();
        assert_eq!(w.len(), 1);
        assert!((w[0].0 - 0.25).abs() < 1e-10 && (w[0].1 - 0.6).abs() < 1e-10);
        let all = predicate_intervals(|_| Ok(true), 0.0, 1.0, 10).unwrap();
        assert_eq!(all, vec![(0.0, 1.0)]);
    }

    #[test]
    fn scan_without_crossing() {
        let r = bisect_predicate(|_| Ok(true), 0.1, 0.9);
        assert!(matches!(r, Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn prism_quad_face_relint() {
        // A form whose minimum over the prism V² sits in the middle of the
        // quadrilateral facet v₂ = m.
        let d = 0.2;
        let m = (d + 1.0) / 2.0;
        let target = DVector::from_vec(vec![(d + m) / 2.0, m, (m + 1.0) / 2.0]);
        let mut a = DMatrix::identity(3, 3);
        a[(1, 1)] = 1e-3;
        let b = -(&a * &target) * 2.0 + DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let q = QuadForm::new(0.0, b, a).unwrap();
        let p = ville_cells(d).unwrap().remove(1);
        let rf = restrict(&q, &p, &[0, 1, 3, 4], d).unwrap();
        assert!(rf.in_relint && rf.critical_bary.is_none());
        let e = optimize(&q, &p, Sense::Min, d).unwrap();
        assert_eq!(e.face, vec![0, 1, 3, 4]);
    }
}
