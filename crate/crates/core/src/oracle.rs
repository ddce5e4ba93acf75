//! Independent cross-checks: a random walk on pinched operators, brute-force
//! lattice optimization, and the audit that ties them to the inequalities.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{certify_sign, certify_sign_fast, euler_form, i_lambda, make_operator, Certificate, CurvOp, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::geography::{constants, lambda_of_delta, Which};
use crate::polytopes::{Polytope, PolytopeKind};
use crate::qp_face::Sense;
use crate::quadforms::{f_ville_value, QuadForm};
use crate::ricci::ricci_rhs;

/// Accepted states per chain; chain k uses RNG stream k.
pub const CHAIN_LEN: usize = 1000;
const STUCK_WINDOW: u64 = 100_000;
const STUCK_MIN_ACCEPT: u64 = 100;
const MAX_GRID_POINTS: u128 = 100_000_000;
const CHECK_TOL: f64 = 1e-9;

fn check_sampler_args(delta: f64, n: usize) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta(delta));
    }
    if n == 0 {
        return Err(Error::BadParameter("sample count must be positive".into()));
    }
    Ok(())
}

fn propose(r: &CurvOp, step: f64, rng: &mut ChaCha8Rng) -> Result<CurvOp> {
    let mut g = || step * rng.sample::<f64, _>(StandardNormal);
    let u = r.u + g();
    let mut wp = r.wplus;
    let mut wm = r.wminus;
    for x in wp.iter_mut().chain(wm.iter_mut()) {
        *x += g();
    }
    let mut c = r.c;
    for x in c.iter_mut().flatten() {
        *x += g();
    }
    let mp = wp.iter().sum::<f64>() / 3.0;
    let mm = wm.iter().sum::<f64>() / 3.0;
    make_operator(u, wp.map(|x| x - mp), wm.map(|x| x - mm), c)
}

/// One chain of the walk, returning accepted states with their certificates.
fn run_chain(start: &CurvOp, delta: f64, len: usize, seed: u64, stream: u64) -> Result<Vec<(CurvOp, Certificate)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let base = 0.05 * (1.0 - delta);
    let mut step = base;
    let mut cur = *start;
    let mut out = Vec::with_capacity(len);
    let mut rejections = 0u32;
    let (mut win_prop, mut win_acc) = (0u64, 0u64);
    while out.len() < len {
        let cand = propose(&cur, step, &mut rng)?;
        let cert = certify_sign_fast(&cand, delta, DEFAULT_TOL, 1)?;
        win_prop += 1;
        if let Some(cert) = cert {
            win_acc += 1;
            rejections = 0;
            step = (step * 2.0).min(base);
            cur = cand;
            out.push((cand, cert));
        } else {
            rejections += 1;
            if rejections >= 10 {
                step /= 2.0;
                rejections = 0;
            }
        }
        if win_prop == STUCK_WINDOW {
            if win_acc < STUCK_MIN_ACCEPT {
                return Err(Error::StuckSampler { accepted: win_acc, proposed: win_prop });
            }
            win_prop = 0;
            win_acc = 0;
        }
    }
    Ok(out)
}

fn run_chains(start: &CurvOp, delta: f64, n: usize, seed: u64) -> Result<Vec<Vec<(CurvOp, Certificate)>>> {
    let chains = n.div_ceil(CHAIN_LEN);
    (0..chains)
        .into_par_iter()
        .map(|k| {
            let len = CHAIN_LEN.min(n - k * CHAIN_LEN);
            run_chain(start, delta, len, seed, k as u64)
        })
        .collect()
}

/// `n` positively δ-pinched operators from a walk started at the identity.
pub fn sample_pinched(delta: f64, n: usize, seed: u64) -> Result<Vec<CurvOp>> {
    sample_pinched_from(&CurvOp::identity(), delta, n, seed)
}

/// As [`sample_pinched`], with every chain started at `start`.
pub fn sample_pinched_from(start: &CurvOp, delta: f64, n: usize, seed: u64) -> Result<Vec<CurvOp>> {
    check_sampler_args(delta, n)?;
    if !certify_sign(start, delta, DEFAULT_TOL, 1)?.feasible {
        return Err(Error::BadParameter("walk must start at a pinched operator".into()));
    }
    Ok(run_chains(start, delta, n, seed)?.into_iter().flatten().map(|(r, _)| r).collect())
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Gram-type matrix with `Q(Σ bᵢvᵢ) = bᵀGb` whenever `Σ bᵢ = 1`.
fn bary_gram(q: &QuadForm, vs: &[nalgebra::DVector<f64>]) -> DMatrix<f64> {
    let n = vs.len();
    DMatrix::from_fn(n, n, |i, j| q.c0 + 0.5 * (q.b.dot(&vs[i]) + q.b.dot(&vs[j])) + vs[i].dot(&(&q.a * &vs[j])))
}

fn better(sense: Sense, a: f64, b: f64) -> f64 {
    match sense {
        Sense::Min => a.min(b),
        Sense::Max => a.max(b),
    }
}

fn worst(sense: Sense) -> f64 {
    match sense {
        Sense::Min => f64::INFINITY,
        Sense::Max => f64::NEG_INFINITY,
    }
}

/// Enumerates the compositions of `remaining` into the coordinates `idx..`,
/// tracking `s = G·k` and `kᵀGk` incrementally.
fn compositions(g: &DMatrix<f64>, idx: usize, remaining: u32, s: &mut Vec<f64>, quad: f64, sense: Sense, best: &mut f64) {
    let n = g.nrows();
    if idx == n - 1 {
        let k = f64::from(remaining);
        let v = quad + 2.0 * k * s[idx] + k * k * g[(idx, idx)];
        *best = better(sense, *best, v);
        return;
    }
    for k in 0..=remaining {
        let kf = f64::from(k);
        let q2 = quad + 2.0 * kf * s[idx] + kf * kf * g[(idx, idx)];
        for j in 0..n {
            s[j] += kf * g[(idx, j)];
        }
        compositions(g, idx + 1, remaining - k, s, q2, sense, best);
        for j in 0..n {
            s[j] -= kf * g[(idx, j)];
        }
    }
}

/// Extremum of `q` over the barycentric lattice of denominator `resolution`
/// (triangle lattice × segment lattice for prisms).
pub fn grid_extremum(q: &QuadForm, p: &Polytope, resolution: u32, sense: Sense, delta: f64) -> Result<f64> {
    if resolution < 2 {
        return Err(Error::BadParameter(format!("resolution must be at least 2, got {resolution}")));
    }
    if q.dim() != p.dim_ambient {
        return Err(Error::DimensionMismatch { expected: p.dim_ambient, got: q.dim() });
    }
    let res = u128::from(resolution);
    let vs = p.vertex_coords(delta);
    let scale = f64::from(resolution).powi(2);
    match p.kind {
        PolytopeKind::Simplex => {
            let n = vs.len() as u128;
            let count = binomial(res + n - 1, n - 1);
            if count > MAX_GRID_POINTS {
                return Err(Error::ResolutionTooLarge(count));
            }
            let g = bary_gram(q, &vs);
            let n = vs.len();
            let best = (0..=resolution)
                .into_par_iter()
                .map(|k0| {
                    let kf = f64::from(k0);
                    let mut s: Vec<f64> = (0..n).map(|j| kf * g[(0, j)]).collect();
                    let mut best = worst(sense);
                    if n == 1 {
                        return if k0 == resolution { kf * kf * g[(0, 0)] } else { worst(sense) };
                    }
                    compositions(&g, 1, resolution - k0, &mut s, kf * kf * g[(0, 0)], sense, &mut best);
                    best
                })
                .reduce(|| worst(sense), |a, b| better(sense, a, b));
            Ok(best / scale)
        }
        PolytopeKind::Prism { bottom, top } => {
            let count = binomial(res + 2, 2) * (res + 1);
            if count > MAX_GRID_POINTS {
                return Err(Error::ResolutionTooLarge(count));
            }
            let best = (0..=resolution)
                .into_par_iter()
                .map(|h| {
                    let tau = f64::from(h) / f64::from(resolution);
                    // the slice at height τ is a triangle
                    let tri: Vec<_> = (0..3).map(|i| &vs[bottom[i]] * (1.0 - tau) + &vs[top[i]] * tau).collect();
                    let g = bary_gram(q, &tri);
                    let mut best = worst(sense);
                    let mut s: Vec<f64> = vec![0.0; 3];
                    for k0 in 0..=resolution {
                        let kf = f64::from(k0);
                        for j in 0..3 {
                            s[j] = kf * g[(0, j)];
                        }
                        compositions(&g, 1, resolution - k0, &mut s, kf * kf * g[(0, 0)], sense, &mut best);
                    }
                    best / scale
                })
                .reduce(|| worst(sense), |a, b| better(sense, a, b));
            Ok(best)
        }
        PolytopeKind::General => Err(Error::BadParameter(format!("{} is neither a simplex nor a prism", p.name))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckStat {
    /// Smallest `lhs − rhs` seen; negative beyond the tolerance is a violation.
    pub worst_margin: f64,
    pub violations: u64,
}

impl CheckStat {
    fn new() -> Self {
        CheckStat { worst_margin: f64::INFINITY, violations: 0 }
    }

    fn record(&mut self, margin: f64) {
        self.worst_margin = self.worst_margin.min(margin);
        if !(margin >= -CHECK_TOL) {
            self.violations += 1;
        }
    }

    fn merge(&mut self, other: &CheckStat) {
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        self.violations += other.violations;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub delta: f64,
    pub samples: u64,
    pub seed: u64,
    pub lambda: f64,
    pub lambda_ville: Option<f64>,
    pub checks: BTreeMap<String, CheckStat>,
}

impl AuditReport {
    pub fn violations(&self) -> u64 {
        self.checks.values().map(|c| c.violations).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn merge(&mut self, other: &AuditReport) {
        self.samples += other.samples;
        for (k, v) in &other.checks {
            self.checks.entry(k.clone()).or_insert_with(CheckStat::new).merge(v);
        }
    }
}

pub const CHECK_NAMES: [&str; 7] =
    ["a_i_lambda", "b_ricci", "c_weyl_eta_-1", "c_weyl_eta_0", "c_weyl_eta_1", "d_euler", "e_ville"];

fn audit_one(r: &CurvOp, cert: &Certificate, delta: f64, lambda: f64, lambda_v: Option<f64>, checks: &mut BTreeMap<String, CheckStat>) -> Result<()> {
    let mut rec = |name: &str, m: f64| checks.get_mut(name).expect("known check").record(m);
    rec("a_i_lambda", i_lambda(r, lambda)?);
    rec("b_ricci", ricci_rhs(r.u, &r.wplus, &r.wminus, delta, cert.t1) - r.c_norm_sq());
    let cap = 8.0 / 3.0 * (1.0 - delta).powi(2);
    for (name, eta) in [("c_weyl_eta_-1", -1.0), ("c_weyl_eta_0", 0.0), ("c_weyl_eta_1", 1.0)] {
        rec(name, cap - (r.wplus_norm_sq() + eta * r.wminus_norm_sq()));
    }
    rec("d_euler", euler_form(r));
    if let Some(lv) = lambda_v {
        let v = r.wplus.map(|w| r.u + w / 2.0);
        let outside = v.iter().map(|&x| (delta - x).max(x - 1.0)).fold(f64::NEG_INFINITY, f64::max);
        let m = if outside > CHECK_TOL {
            -outside
        } else {
            let v = v.map(|x| x.clamp(delta, 1.0));
            4.0 * i_lambda(r, lv)? - f_ville_value(lv, delta, &v)
        };
        rec("e_ville", m);
    }
    Ok(())
}

/// Samples `n` operators and checks every pointwise inequality on each.
pub fn audit(delta: f64, n: usize, seed: u64) -> Result<AuditReport> {
    audit_from(&CurvOp::identity(), delta, n, seed)
}

/// As [`audit`], with every chain of the walk started at `start`.
pub fn audit_from(start: &CurvOp, delta: f64, n: usize, seed: u64) -> Result<AuditReport> {
    check_sampler_args(delta, n)?;
    if !certify_sign(start, delta, DEFAULT_TOL, 1)?.feasible {
        return Err(Error::BadParameter("walk must start at a pinched operator".into()));
    }
    let lambda = lambda_of_delta(delta, Which::Best)?;
    let lambda_v = if delta >= constants().delta0_ville.value { Some(lambda_of_delta(delta, Which::Ville)?) } else { None };
    let empty = |samples: u64| {
        let mut checks = BTreeMap::new();
        for name in CHECK_NAMES {
            if name != "e_ville" || lambda_v.is_some() {
                checks.insert(name.to_string(), CheckStat::new());
            }
        }
        AuditReport { delta, samples, seed, lambda, lambda_ville: lambda_v, checks }
    };
    let chains = n.div_ceil(CHAIN_LEN);
    let parts: Vec<AuditReport> = (0..chains)
        .into_par_iter()
        .map(|k| {
            let len = CHAIN_LEN.min(n - k * CHAIN_LEN);
            let chain = run_chain(start, delta, len, seed, k as u64)?;
            let mut rep = empty(chain.len() as u64);
            for (r, cert) in &chain {
                audit_one(r, cert, delta, lambda, lambda_v, &mut rep.checks)?;
            }
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    let mut total = empty(0);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// One random positive semidefinite 6×6 matrix of random rank, split into
/// its diagonal blocks' spectra (ascending) and the off-diagonal block.
pub fn random_psd_block<R: Rng>(rng: &mut R) -> ([f64; 3], [f64; 3], Matrix3<f64>) {
    let rank = rng.random_range(1..=6);
    let g = DMatrix::<f64>::from_fn(rank, 6, |_, _| rng.sample(StandardNormal));
    let m = g.transpose() * g;
    let a = m.view((0, 0), (3, 3)).into_owned();
    let b = m.view((3, 3), (3, 3)).into_owned();
    let c = Matrix3::from_fn(|i, j| m[(3 + i, j)]);
    let eig = |x: DMatrix<f64>| {
        let mut e: Vec<f64> = x.symmetric_eigenvalues().iter().map(|v| v.max(0.0)).collect();
        e.sort_by(f64::total_cmp);
        [e[0], e[1], e[2]]
    };
    (eig(a), eig(b), c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytopes::einstein_simplex;
    use crate::quadforms::q_euler;

    #[test]
    fn binomial_counts() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(47, 7), 62_891_499);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(sample_pinched(1.0, 5, 0), Err(Error::BadDelta(_))));
        assert!(matches!(sample_pinched(0.5, 0, 0), Err(Error::BadParameter(_))));
        let p = einstein_simplex(0.3, 5).unwrap();
        assert!(matches!(grid_extremum(&q_euler(), &p, 1, Sense::Max, 0.3), Err(Error::BadParameter(_))));
        assert!(matches!(grid_extremum(&q_euler(), &p, 2000, Sense::Max, 0.3), Err(Error::ResolutionTooLarge(_))));
    }

    #[test]
    fn chains_are_deterministic() {
        let a = sample_pinched(0.3, 1500, 7).unwrap();
        let b = sample_pinched(0.3, 1500, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1500);
    }
}
