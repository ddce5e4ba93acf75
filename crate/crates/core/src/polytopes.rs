//! δ-parametrized vertex presentations of the Einstein simplices and of the
//! four linearity cells of Ville's polyhedron.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::linalg::orthonormal_basis;

const PIVOT_TOL: f64 = 1e-12;

/// A point of the form `base + δ·slope`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineVertex {
    pub base: Vec<f64>,
    pub slope: Vec<f64>,
}

impl AffineVertex {
    pub fn new(base: Vec<f64>, slope: Vec<f64>) -> Self {
        assert_eq!(base.len(), slope.len());
        AffineVertex { base, slope }
    }

    /// Coordinates given as `(a, b)` pairs meaning `(a + b·δ)/den`.
    fn rational(den: f64, coords: &[(i32, i32)]) -> Self {
        AffineVertex {
            base: coords.iter().map(|&(a, _)| f64::from(a) / den).collect(),
            slope: coords.iter().map(|&(_, b)| f64::from(b) / den).collect(),
        }
    }

    pub fn at(&self, delta: f64) -> DVector<f64> {
        DVector::from_iterator(self.base.len(), self.base.iter().zip(&self.slope).map(|(b, s)| b + delta * s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolytopeKind {
    Simplex,
    /// Triangle × segment; `top[i]` sits over `bottom[i]`.
    Prism { bottom: [usize; 3], top: [usize; 3] },
    General,
}

/// A face of the lattice, as a sorted vertex index set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeFace {
    pub vertices: Vec<usize>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub name: String,
    pub dim_ambient: usize,
    pub vertices: Vec<AffineVertex>,
    pub labels: Vec<String>,
    /// Complete face lattice without the empty face, ordered by dimension
    /// and then lexicographically.
    pub faces: Vec<LatticeFace>,
    pub kind: PolytopeKind,
}

/// A face together with an orthonormal basis of its direction space.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub vertices: Vec<usize>,
    pub dim: usize,
    /// `dim_ambient × dim`, orthonormal columns.
    pub basis: DMatrix<f64>,
}

impl Polytope {
    fn simplex(name: &str, labels: Vec<String>, vertices: Vec<AffineVertex>) -> Self {
        let n = vertices.len();
        let mut faces = Vec::new();
        for size in 1..=n {
            for s in subsets(n, size) {
                faces.push(LatticeFace { vertices: s, dim: size - 1 });
            }
        }
        Polytope {
            name: name.to_string(),
            dim_ambient: vertices[0].base.len(),
            vertices,
            labels,
            faces,
            kind: PolytopeKind::Simplex,
        }
    }

    fn prism(name: &str, labels: Vec<String>, vertices: Vec<AffineVertex>, bottom: [usize; 3], top: [usize; 3]) -> Self {
        let mut faces: Vec<LatticeFace> = Vec::new();
        let mut push = |mut v: Vec<usize>, dim: usize| {
            v.sort_unstable();
            faces.push(LatticeFace { vertices: v, dim });
        };
        for i in 0..vertices.len() {
            push(vec![i], 0);
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            push(vec![bottom[i], bottom[j]], 1);
            push(vec![top[i], top[j]], 1);
        }
        for i in 0..3 {
            push(vec![bottom[i], top[i]], 1);
        }
        push(bottom.to_vec(), 2);
        push(top.to_vec(), 2);
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            push(vec![bottom[i], bottom[j], top[i], top[j]], 2);
        }
        push((0..vertices.len()).collect(), 3);
        faces.sort_by(|a, b| (a.dim, &a.vertices).cmp(&(b.dim, &b.vertices)));
        Polytope {
            name: name.to_string(),
            dim_ambient: vertices[0].base.len(),
            vertices,
            labels,
            faces,
            kind: PolytopeKind::Prism { bottom, top },
        }
    }

    /// Dimension of the polytope itself.
    pub fn dim(&self) -> usize {
        self.faces.iter().map(|f| f.dim).max().unwrap_or(0)
    }

    pub fn vertex_coords(&self, delta: f64) -> Vec<DVector<f64>> {
        self.vertices.iter().map(|v| v.at(delta)).collect()
    }

    /// Looks up a vertex set in the lattice; `face` need not be sorted.
    pub fn find_face(&self, face: &[usize]) -> Option<&LatticeFace> {
        let mut f = face.to_vec();
        f.sort_unstable();
        f.dedup();
        if f.len() != face.len() {
            return None;
        }
        self.faces.iter().find(|lf| lf.vertices == f)
    }

    /// Barycentric coordinates of `x` on a simplex (least squares against
    /// the affine hull), or `None` for other kinds.
    pub fn barycentric(&self, x: &DVector<f64>, delta: f64) -> Option<Vec<f64>> {
        if self.kind != PolytopeKind::Simplex {
            return None;
        }
        let vs = self.vertex_coords(delta);
        let n = self.dim_ambient;
        let mut a = DMatrix::zeros(n + 1, vs.len());
        for (j, v) in vs.iter().enumerate() {
            a.view_mut((0, j), (n, 1)).copy_from(v);
            a[(n, j)] = 1.0;
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(x);
        rhs[n] = 1.0;
        let sol = a.clone().svd(true, true).solve(&rhs, 1e-14).ok()?;
        if (&a * &sol - &rhs).norm() > 1e-10 * (1.0 + x.norm()) {
            return None;
        }
        Some(sol.iter().copied().collect())
    }

    /// Facet inequalities `n·x ≤ h` (unit outward normals) of a polytope in ℝ³.
    pub fn facet_inequalities(&self, delta: f64) -> Vec<(Vector3<f64>, f64)> {
        assert_eq!(self.dim_ambient, 3, "facet inequalities are only built in dimension 3");
        let vs: Vec<Vector3<f64>> = self.vertex_coords(delta).iter().map(|v| Vector3::new(v[0], v[1], v[2])).collect();
        let centroid = vs.iter().sum::<Vector3<f64>>() / vs.len() as f64;
        self.faces
            .iter()
            .filter(|f| f.dim == 2)
            .map(|f| {
                let p0 = vs[f.vertices[0]];
                let mut normal = Vector3::zeros();
                // First non-degenerate pair of edges spans the facet plane.
                'outer: for a in 1..f.vertices.len() {
                    for b in a + 1..f.vertices.len() {
                        let n = (vs[f.vertices[a]] - p0).cross(&(vs[f.vertices[b]] - p0));
                        if n.norm() > 1e-14 {
                            normal = n.normalize();
                            break 'outer;
                        }
                    }
                }
                if normal.dot(&(centroid - p0)) > 0.0 {
                    normal = -normal;
                }
                (normal, normal.dot(&p0))
            })
            .collect()
    }

    /// Membership with tolerance `tol` on barycentric coordinates (simplices)
    /// or on facet inequalities (prisms).
    pub fn contains(&self, x: &DVector<f64>, delta: f64, tol: f64) -> bool {
        match self.kind {
            PolytopeKind::Simplex => match self.barycentric(x, delta) {
                Some(b) => b.iter().all(|&l| l >= -tol) && (b.iter().sum::<f64>() - 1.0).abs() <= tol,
                None => false,
            },
            _ => {
                let p = Vector3::new(x[0], x[1], x[2]);
                self.facet_inequalities(delta).iter().all(|(n, h)| n.dot(&p) <= h + tol)
            }
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn check_open_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::DegenerateDelta(delta))
    }
}

// Rows in thirds: (a, b) means (a + b·δ)/3. Columns w₁⁺ w₂⁺ w₁⁻ w₂⁻ u.
const P_ROWS: [[(i32, i32); 5]; 6] = [
    [(-2, 2), (-2, 2), (0, 0), (0, 0), (1, 2)],
    [(-4, 4), (2, -2), (0, 0), (0, 0), (2, 1)],
    [(0, 0), (0, 0), (-2, 2), (-2, 2), (1, 2)],
    [(0, 0), (0, 0), (-4, 4), (2, -2), (2, 1)],
    [(0, 0), (0, 0), (0, 0), (0, 0), (3, 0)],
    [(0, 0), (0, 0), (0, 0), (0, 0), (0, 3)],
];

// t₁ column of Δ⁶ (q₁…q₇) and (t₁, t₂) columns of Δ⁷ (v₁…v₈), in thirds.
const Q_T1: [(i32, i32); 7] = [(1, -1), (2, -2), (-1, 1), (-2, 2), (-3, 3), (3, -3), (0, 0)];
const V_T: [[(i32, i32); 2]; 8] = [
    [(1, -1), (-2, 2)],
    [(2, -2), (-1, 1)],
    [(-1, 1), (2, -2)],
    [(-2, 2), (1, -1)],
    [(-3, 3), (0, 0)],
    [(3, -3), (0, 0)],
    [(0, 0), (-3, 3)],
    [(0, 0), (3, -3)],
];

/// The Einstein simplex Δ⁵, Δ⁶ or Δ⁷ with coordinates
/// `(w₁⁺, w₂⁺, w₁⁻, w₂⁻, u[, t₁[, t₂]])`.
pub fn einstein_simplex(delta: f64, variant: u8) -> Result<Polytope> {
    check_open_delta(delta)?;
    let (name, verts, prefix): (&str, Vec<AffineVertex>, &str) = match variant {
        5 => ("d5", P_ROWS.iter().map(|r| AffineVertex::rational(3.0, r)).collect(), "p"),
        6 => {
            let rows = (0..7).map(|j| {
                let p = match j {
                    0..=4 => j,
                    5 => 4,
                    _ => 5,
                };
                let mut r = P_ROWS[p].to_vec();
                r.push(Q_T1[j]);
                AffineVertex::rational(3.0, &r)
            });
            ("d6", rows.collect(), "q")
        }
        7 => {
            let rows = (0..8).map(|j| {
                let p = match j {
                    0..=3 => j,
                    4 | 5 => 4,
                    _ => 5,
                };
                let mut r = P_ROWS[p].to_vec();
                r.extend_from_slice(&V_T[j]);
                AffineVertex::rational(3.0, &r)
            });
            ("d7", rows.collect(), "v")
        }
        _ => return Err(Error::BadParameter(format!("unknown simplex variant {variant}"))),
    };
    let labels = (1..=verts.len()).map(|j| format!("{prefix}{j}")).collect();
    Ok(Polytope::simplex(name, labels, verts))
}

// Ville coordinates in halves: (a, b) means (a + b·δ)/2.
const M: (i32, i32) = (1, 1);
const D: (i32, i32) = (0, 2);
const ONE: (i32, i32) = (2, 0);

/// The cells V¹…V⁴ of `δ ≤ v₁ ≤ v₂ ≤ v₃ ≤ 1` cut by the planes `vᵢ = (δ+1)/2`.
pub fn ville_cells(delta: f64) -> Result<Vec<Polytope>> {
    check_open_delta(delta)?;
    let mk = |rows: &[[(i32, i32); 3]]| -> Vec<AffineVertex> {
        rows.iter().map(|r| AffineVertex::rational(2.0, r)).collect()
    };
    let labels = |i: usize, n: usize| -> Vec<String> { (1..=n).map(|j| format!("q{j}^{i}")).collect() };
    let v1 = mk(&[[M, M, M], [M, M, ONE], [M, ONE, ONE], [ONE, ONE, ONE]]);
    let v2 = mk(&[[D, M, M], [D, M, ONE], [D, ONE, ONE], [M, M, M], [M, M, ONE], [M, ONE, ONE]]);
    let v3 = mk(&[[D, D, M], [D, D, ONE], [D, M, M], [D, M, ONE], [M, M, M], [M, M, ONE]]);
    let v4 = mk(&[[D, D, D], [D, D, M], [D, M, M], [M, M, M]]);
    Ok(vec![
        Polytope::simplex("v1", labels(1, 4), v1),
        Polytope::prism("v2", labels(2, 6), v2, [0, 1, 2], [3, 4, 5]),
        Polytope::prism("v3", labels(3, 6), v3, [0, 2, 4], [1, 3, 5]),
        Polytope::simplex("v4", labels(4, 4), v4),
    ])
}

/// Faces of dimension `≤ max_dim`, each with an orthonormal basis of the
/// direction space of its affine hull evaluated at `delta`.
pub fn enumerate_faces(p: &Polytope, max_dim: usize, delta: f64) -> Vec<Face> {
    let vs = p.vertex_coords(delta);
    p.faces
        .iter()
        .filter(|f| f.dim <= max_dim)
        .map(|f| {
            let v0 = &vs[f.vertices[0]];
            let dirs: Vec<DVector<f64>> = f.vertices[1..].iter().map(|&j| &vs[j] - v0).collect();
            Face { vertices: f.vertices.clone(), dim: f.dim, basis: orthonormal_basis(&dirs, p.dim_ambient, PIVOT_TOL) }
        })
        .collect()
}
