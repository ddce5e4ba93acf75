//! Closed-form geography: the λ curves, the χ/σ bounds, and the menus and
//! regions derived from them.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

/// An algebraic breakpoint: the root of `poly` (highest degree first) inside
/// `approx ± 0.05`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakpoint {
    pub name: &'static str,
    pub poly: &'static [i64],
    pub approx: f64,
    pub value: f64,
}

pub const DELTA1_POLY: &[i64] = &[2, -40, 89, -6];
pub const DELTA2_POLY: &[i64] = &[2279, 6246, 4470, 2060, -450, -24, -1];
pub const DELTA3_POLY: &[i64] = &[140, 40, -6, 88, -19];
pub const DELTA2_STAR_POLY: &[i64] = &[2, -16, 5];
pub const DELTA0_VILLE_POLY: &[i64] = &[1, -18, 2, -6, 1];
pub const DELTA1_VILLE_POLY: &[i64] = &[31, 1, 5, -1];

fn horner(poly: &[i64], x: f64) -> f64 {
    poly.iter().fold(0.0, |acc, &c| acc * x + c as f64)
}

/// Bisection for a root of an integer polynomial on `[lo, hi]`.
pub fn poly_root(poly: &[i64], lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa = horner(poly, a);
    if fa == 0.0 {
        return Ok(a);
    }
    if fa.signum() == horner(poly, b).signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = horner(poly, m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn breakpoint(name: &'static str, poly: &'static [i64], approx: f64) -> Breakpoint {
    let value = poly_root(poly, approx - 0.05, approx + 0.05)
        .unwrap_or_else(|e| panic!("breakpoint {name} not bracketed: {e}"));
    Breakpoint { name, poly, approx, value }
}

/// All breakpoint constants, computed once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub delta1: Breakpoint,
    pub delta2: Breakpoint,
    pub delta3: Breakpoint,
    pub delta2_star: Breakpoint,
    pub delta0_ville: Breakpoint,
    pub delta1_ville: Breakpoint,
}

pub fn constants() -> &'static Constants {
    static C: OnceLock<Constants> = OnceLock::new();
    C.get_or_init(|| Constants {
        delta1: breakpoint("delta1", DELTA1_POLY, 0.069),
        delta2: breakpoint("delta2", DELTA2_POLY, 0.191),
        delta3: breakpoint("delta3", DELTA3_POLY, 0.211),
        delta2_star: breakpoint("delta2*", DELTA2_STAR_POLY, 0.326),
        delta0_ville: breakpoint("delta0v", DELTA0_VILLE_POLY, 0.163),
        delta1_ville: breakpoint("delta1v", DELTA1_VILLE_POLY, 0.166),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Best,
    Star,
    Ville,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Best => "best",
            Which::Star => "star",
            Which::Ville => "ville",
        }
    }
}

fn branch_small(d: f64) -> f64 {
    ((24.0 / d + 8.0 - 8.0 * d + d * d).sqrt() + d - 4.0) / (6.0 * (3.0 - d))
}

fn branch_sqrt(d: f64) -> f64 {
    4.0 / (3.0 * 15f64.sqrt()) * (1.0 - d) / (d * (d + 2.0)).sqrt()
}

fn branch_mid(d: f64) -> f64 {
    let rad = 55.0 * d.powi(4) + 40.0 * d.powi(3) + 6.0 * d * d + 8.0 * d - 1.0;
    (26.0 * d * d + 8.0 * d + 2.0 - 2.0 * 3f64.sqrt() * rad.max(0.0).sqrt()) / (3.0 * (1.0 - d).powi(2))
}

fn branch_rational(d: f64) -> f64 {
    8.0 * (1.0 - d).powi(2) / (24.0 * d * d - 12.0 * d + 15.0)
}

fn branch_ville_low(d: f64) -> f64 {
    let rad = 11.0 * d.powi(4) + 68.0 * d.powi(3) + 6.0 * d * d + 28.0 * d - 5.0;
    (7.0 * d * d + 10.0 * d + 1.0 - 3f64.sqrt() * rad.max(0.0).sqrt()) / (6.0 * (1.0 - d).powi(2))
}

/// One of the three piecewise λ curves with its breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCurve {
    pub which: Which,
    pub breakpoints: Vec<Breakpoint>,
}

impl LambdaCurve {
    pub fn new(which: Which) -> Self {
        let c = constants();
        let breakpoints = match which {
            Which::Best => vec![c.delta1, c.delta2, c.delta3],
            Which::Star => vec![c.delta1, c.delta2_star],
            Which::Ville => vec![c.delta0_ville, c.delta1_ville, c.delta3],
        };
        LambdaCurve { which, breakpoints }
    }

    /// Smallest δ of the domain; the domain is open there for best/star.
    pub fn domain_start(&self) -> f64 {
        match self.which {
            Which::Ville => constants().delta0_ville.value,
            _ => 0.0,
        }
    }

    pub fn in_domain(&self, delta: f64) -> bool {
        let ok_hi = delta <= 1.0;
        match self.which {
            Which::Ville => delta >= self.domain_start() && ok_hi,
            _ => delta > 0.0 && ok_hi,
        }
    }

    pub fn eval(&self, delta: f64) -> Result<f64> {
        if !self.in_domain(delta) {
            return Err(Error::OutOfDomain { curve: self.which.name(), delta });
        }
        let c = constants();
        let d = delta;
        Ok(match self.which {
            Which::Best => {
                if d < c.delta1.value {
                    branch_small(d)
                } else if d < c.delta2.value {
                    branch_sqrt(d)
                } else if d < c.delta3.value {
                    branch_mid(d)
                } else {
                    branch_rational(d)
                }
            }
            Which::Star => {
                if d < c.delta1.value {
                    branch_small(d)
                } else if d < c.delta2_star.value {
                    branch_sqrt(d)
                } else {
                    branch_rational(d)
                }
            }
            Which::Ville => {
                if d < c.delta1_ville.value {
                    branch_ville_low(d)
                } else if d < c.delta3.value {
                    branch_mid(d)
                } else {
                    branch_rational(d)
                }
            }
        })
    }
}

pub fn lambda_of_delta(delta: f64, which: Which) -> Result<f64> {
    LambdaCurve::new(which).eval(delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeoContext {
    Positive { delta: f64 },
    NegativeVol { delta: f64, vol: f64 },
    NegativeDiam { delta: f64, diameter: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeoBounds {
    pub chi_max: f64,
    pub sigma_max: f64,
    pub context: GeoContext,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::BadDelta(delta))
    }
}

/// `(2 + cosh D) sinh⁴(D/2)`.
fn diameter_profile(d: f64) -> f64 {
    (2.0 + d.cosh()) * (d / 2.0).sinh().powi(4)
}

pub fn geography_bounds(context: GeoContext) -> Result<GeoBounds> {
    let (chi_max, sigma_max) = match context {
        GeoContext::Positive { delta } => {
            check_delta(delta)?;
            let r = (1.0 / delta - 1.0).powi(2);
            (8.0 / 9.0 * r, 8.0 / 27.0 * r)
        }
        GeoContext::NegativeVol { delta, vol } => {
            check_delta(delta)?;
            if !(vol > 0.0 && vol.is_finite()) {
                return Err(Error::BadParameter(format!("volume must be positive, got {vol}")));
            }
            (3.0 / (4.0 * PI * PI) * vol, 2.0 / (9.0 * PI * PI) * (1.0 - delta).powi(2) * vol)
        }
        GeoContext::NegativeDiam { delta, diameter } => {
            check_delta(delta)?;
            if !(diameter > 0.0 && diameter.is_finite()) {
                return Err(Error::BadParameter(format!("diameter must be positive, got {diameter}")));
            }
            let p = diameter_profile(diameter);
            (2.0 * p, 16.0 / 27.0 * (1.0 - delta).powi(2) * p)
        }
    };
    Ok(GeoBounds { chi_max, sigma_max, context })
}

/// Smallest volume of a negatively δ-pinched manifold with σ ≠ 0.
pub fn min_volume_nonzero_sigma(delta: f64) -> f64 {
    9.0 * PI * PI / (2.0 * (1.0 - delta).powi(2))
}

/// Smallest diameter of a negatively δ-pinched manifold with σ ≠ 0.
pub fn min_diameter_nonzero_sigma(delta: f64) -> f64 {
    let target = 27.0 / (16.0 * (1.0 - delta).powi(2));
    if !target.is_finite() {
        return f64::INFINITY;
    }
    let mut hi = 1.0;
    while diameter_profile(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-13 * hi.max(1.0) {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if diameter_profile(m) < target {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Lower bound for χ when σ ≠ 0 in the negative case, and whether δ lies
/// in the range where the bound is `1/λ(δ)`.
pub fn euler_gap(delta: f64) -> (f64, bool) {
    let v = (24.0 * delta * delta - 12.0 * delta + 15.0) / (8.0 * (1.0 - delta).powi(2));
    let valid = delta >= constants().delta3.value && delta <= 1.0;
    (v, valid)
}

pub fn b1_bound(bplus: u64, bminus: u64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let hi = bplus.max(bminus) as f64;
    let lo = bplus.min(bminus) as f64;
    Ok(1.0 + (lambda - 1.0) / (2.0 * lambda) * hi + (lambda + 1.0) / (2.0 * lambda) * lo)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Homeotype {
    pub label: String,
    pub spin: bool,
    /// Number of ℂP² (non-spin) or S²×S² (spin) summands.
    pub r: u64,
    /// Number of ℂP²-bar summands (non-spin only).
    pub s: u64,
    pub chi: i64,
    pub sigma: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomeoMenu {
    pub delta: f64,
    pub orientable: Vec<Homeotype>,
    /// χ bound for the non-orientable case (π₁ = ℤ₂).
    pub nonorientable_chi_max: f64,
}

fn nonspin_label(r: u64, s: u64) -> String {
    match (r, s) {
        (0, 0) => "S4".into(),
        (1, 0) => "CP2".into(),
        (0, 1) => "CP2bar".into(),
        _ => format!("#^{r} CP2 #^{s} CP2bar"),
    }
}

pub fn homeo_menu(delta: f64) -> Result<HomeoMenu> {
    check_delta(delta)?;
    let x = 8.0 / 9.0 * (1.0 / delta - 1.0).powi(2);
    let sbound = 8.0 / 27.0 * (1.0 / delta - 1.0).powi(2);
    let mut out = vec![Homeotype { label: "S4".into(), spin: false, r: 0, s: 0, chi: 2, sigma: 0 }];
    let n = x.floor().max(0.0) as u64;
    for total in 1..=n {
        if (total + 2) as f64 > x {
            break;
        }
        for r in 0..=total {
            let s = total - r;
            if (r as f64 - s as f64).abs() <= sbound {
                out.push(Homeotype {
                    label: nonspin_label(r, s),
                    spin: false,
                    r,
                    s,
                    chi: (r + s + 2) as i64,
                    sigma: r as i64 - s as i64,
                });
            }
        }
    }
    let mut r = 1u64;
    while (2 * r + 2) as f64 <= x {
        let label = if r == 1 { "S2xS2".to_string() } else { format!("#^{r} S2xS2") };
        out.push(Homeotype { label, spin: true, r, s: 0, chi: (2 * r + 2) as i64, sigma: 0 });
        r += 1;
    }
    Ok(HomeoMenu { delta, orientable: out, nonorientable_chi_max: x / 2.0 })
}

/// Admissible region in the `(|σ|, χ)` plane, counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub delta: f64,
    pub lambda: f64,
    pub chi_cap: f64,
    pub sigma_cap: f64,
    pub vertices: Vec<[f64; 2]>,
}

impl Region {
    /// Shoelace area.
    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        let n = self.vertices.len();
        if n == 1 {
            let v = self.vertices[0];
            return (v[0] - p[0]).hypot(v[1] - p[1]) <= tol;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            cross >= -tol * (b[0] - a[0]).hypot(b[1] - a[1]).max(1.0)
        })
    }
}

pub fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>() / 2.0
}

/// Keeps the part of `poly` where `a·p ≤ c`.
fn clip(poly: &[[f64; 2]], a: [f64; 2], c: f64) -> Vec<[f64; 2]> {
    let f = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - c;
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (fp, fq) = (f(&p), f(&q));
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn dedup(mut v: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let same = |a: &[f64; 2], b: &[f64; 2]| (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12;
    v.dedup_by(|a, b| same(a, b));
    while v.len() > 1 && same(&v[0], &v[v.len() - 1]) {
        v.pop();
    }
    v
}

pub fn region_polygon(delta: f64) -> Result<Region> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta(delta));
    }
    let lambda = lambda_of_delta(delta, Which::Best)?;
    let b = geography_bounds(GeoContext::Positive { delta })?;
    let chi_cap = b.chi_max.max(2.0);
    let sigma_cap = b.sigma_max;
    let mut poly = vec![[0.0, 0.0], [sigma_cap, 0.0], [sigma_cap, chi_cap], [0.0, chi_cap]];
    // χ ≥ |σ| + 2
    poly = clip(&poly, [1.0, -1.0], -2.0);
    // λχ ≥ |σ|
    poly = clip(&poly, [1.0, -lambda], 0.0);
    let vertices = dedup(poly);
    if vertices.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(Region { delta, lambda, chi_cap, sigma_cap, vertices })
}
