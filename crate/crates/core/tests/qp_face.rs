use nalgebra::DVector;
use pinch4_core::oracle::grid_extremum;
use pinch4_core::polytopes::{einstein_simplex, ville_cells, Polytope};
use pinch4_core::qp_face::{optimize, restrict, threshold_scan, Definiteness, ScanPredicate, Sense};
use pinch4_core::quadforms::{f_ville, q_euler, q_eta, q_half, q_lambda, QuadForm};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn d6(d: f64) -> Polytope {
    einstein_simplex(d, 6).unwrap()
}

#[test]
fn q1_q3_restriction() {
    for d in [0.1, 0.4, 0.8] {
        let rf = restrict(&q_half(d), &d6(d), &[0, 2], d).unwrap();
        assert_eq!(rf.dim, 1);
        assert!(close(rf.chart_hess_eigs[0], 10.0 / 3.0 * (1.0 - d).powi(2), 1e-12));
        assert_eq!(rf.definiteness, Definiteness::Positive);
        let b = rf.critical_bary.unwrap();
        assert!(close(b[0], 23.0 / 30.0, 1e-12) && close(b[1], 7.0 / 30.0, 1e-12));
    }
}

#[test]
fn q1_q2_restriction_is_negative() {
    for d in [0.1, 0.4, 0.8] {
        let rf = restrict(&q_half(d), &d6(d), &[0, 1], d).unwrap();
        assert!(close(rf.chart_hess_eigs[0], -(1.0 - d).powi(2) / 18.0, 1e-12));
        assert_eq!(rf.definiteness, Definiteness::Negative);
    }
}

#[test]
fn vertex_face_value() {
    let rf = restrict(&q_half(0.3), &d6(0.3), &[4], 0.3).unwrap();
    assert_eq!(rf.definiteness, Definiteness::Vacuous);
    assert!(close(rf.value_at_critical.unwrap(), 0.75, 1e-14));
}

#[test]
fn weyl_maximum_on_p1_p2() {
    let d = 0.5;
    let ex = optimize(&q_eta(-1.0).unwrap(), &einstein_simplex(d, 5).unwrap(), Sense::Max, d).unwrap();
    assert!(close(ex.value, 2.0 / 3.0, 1e-12));
    assert!(ex.face.iter().all(|&i| i < 2));
}

#[test]
fn euler_maximum_at_p5() {
    for d in [0.05, 0.5, 0.95] {
        let ex = optimize(&q_euler(), &einstein_simplex(d, 5).unwrap(), Sense::Max, d).unwrap();
        assert!(close(ex.value, 0.75, 1e-14));
        assert_eq!(ex.face, vec![4]);
    }
}

#[test]
fn half_minimum_vanishes_at_delta_zero() {
    let d = (-199.0 + 9.0 * 545f64.sqrt()) / 71.0;
    let ex = optimize(&q_half(d), &d6(d), Sense::Min, d).unwrap();
    assert!(ex.value.abs() < 1e-12, "{}", ex.value);
    assert_eq!(ex.face, vec![0, 2]);
}

#[test]
fn extremum_value_matches_point() {
    let d = 0.27;
    for sense in [Sense::Min, Sense::Max] {
        let q = q_lambda(0.4, d).unwrap();
        let ex = optimize(&q, &d6(d), sense, d).unwrap();
        assert!(close(q.eval_slice(&ex.point), ex.value, 1e-10));
    }
}

#[test]
fn threshold_examples() {
    let half = |face: Vec<usize>| move |d: f64| Ok((q_half(d), einstein_simplex(d, 6)?, face.clone()));
    let t = threshold_scan(half(vec![0, 3]), ScanPredicate::Relint, 0.01, 0.99).unwrap();
    assert!(close(t, 11.0 / 20.0, 1e-9), "{t}");
    let t = threshold_scan(half(vec![0, 4]), ScanPredicate::Relint, 0.01, 0.99).unwrap();
    assert!(close(t, 4.0 / 13.0, 1e-9), "{t}");
    let t = threshold_scan(half(vec![1, 2, 3]), ScanPredicate::Relint, 0.01, 0.3).unwrap();
    assert!(close(t, 4.0 / 31.0, 1e-9), "{t}");
}

#[test]
fn full_hessian_spectra() {
    let mut h = q_half(0.3).hessian_eigenvalues();
    h.sort_by(f64::total_cmp);
    for (a, b) in h.iter().zip([-0.5, -1.0 / 6.0, 0.0, 2.0 / 3.0, 1.5, 2.0]) {
        assert!(close(*a, b, 1e-10), "{h:?}");
    }
    for eta in [-1.0, -0.3, 0.0, 0.6, 1.0] {
        let mut f = q_eta(eta).unwrap().form_eigenvalues();
        f.sort_by(f64::total_cmp);
        let mut want = vec![1.0, 3.0, eta, 3.0 * eta, 0.0];
        want.sort_by(f64::total_cmp);
        for (a, b) in f.iter().zip(&want) {
            assert!(close(*a, *b, 1e-10), "{f:?} vs {want:?}");
        }
    }
}

/// Edge-chart restricted spectra of Q_λ are (1−δ)² times a δ-free constant.
#[test]
fn restricted_spectra_scale_with_one_minus_delta_squared() {
    for l in [0.3, 0.5, 1.7] {
        let ds = [0.1, 0.3, 0.7];
        let spectra: Vec<Vec<Vec<f64>>> = ds
            .iter()
            .map(|&d| {
                let p = d6(d);
                let q = q_lambda(l, d).unwrap();
                p.faces
                    .iter()
                    .filter(|f| f.dim > 0)
                    .map(|f| {
                        let mut e = restrict(&q, &p, &f.vertices, d).unwrap().chart_hess_eigs;
                        e.sort_by(f64::total_cmp);
                        e.into_iter().map(|x| x / (1.0 - d).powi(2)).collect()
                    })
                    .collect()
            })
            .collect();
        for other in &spectra[1..] {
            for (a, b) in spectra[0].iter().zip(other) {
                for (x, y) in a.iter().zip(b) {
                    assert!(close(*x, *y, 1e-9 * (1.0 + x.abs())), "{a:?} vs {b:?}");
                }
            }
        }
    }
}

fn vertex_lipschitz(q: &QuadForm, p: &Polytope, d: f64) -> (f64, f64) {
    let vs = p.vertex_coords(d);
    let grad = vs.iter().map(|v| q.gradient(v).norm()).fold(0.0, f64::max);
    let mut diam: f64 = 0.0;
    for a in &vs {
        for b in &vs {
            diam = diam.max((a - b).norm());
        }
    }
    (grad, diam)
}

/// optimize is never beaten by a barycentric grid and stays within the
/// grid's Lipschitz resolution.
#[test]
fn agrees_with_grid_oracle() {
    let cases: Vec<(QuadForm, Polytope, f64, u32)> = vec![
        (q_half(0.2), d6(0.2), 0.2, 20),
        (q_lambda(0.7, 0.4).unwrap(), d6(0.4), 0.4, 20),
        (q_eta(0.5).unwrap(), einstein_simplex(0.3, 5).unwrap(), 0.3, 30),
        (q_euler(), einstein_simplex(0.6, 5).unwrap(), 0.6, 30),
        (f_ville(0.3, 0.25, 1).unwrap(), ville_cells(0.25).unwrap().swap_remove(0), 0.25, 40),
        (f_ville(0.3, 0.25, 2).unwrap(), ville_cells(0.25).unwrap().swap_remove(1), 0.25, 40),
        (f_ville(0.3, 0.25, 3).unwrap(), ville_cells(0.25).unwrap().swap_remove(2), 0.25, 40),
    ];
    for (q, p, d, m) in &cases {
        let (lip, diam) = vertex_lipschitz(q, p, *d);
        for sense in [Sense::Min, Sense::Max] {
            let ex = optimize(q, p, sense, *d).unwrap();
            let g = grid_extremum(q, p, *m, sense, *d).unwrap();
            match sense {
                Sense::Min => assert!(ex.value <= g + 1e-12, "{} {ex:?} grid {g}", p.name),
                Sense::Max => assert!(ex.value >= g - 1e-12, "{} {ex:?} grid {g}", p.name),
            }
            assert!((ex.value - g).abs() <= lip * diam / f64::from(*m), "{} {} vs {g}", p.name, ex.value);
        }
    }
}

fn table5(l: f64, d: f64) -> Vec<(Vec<usize>, f64)> {
    let dd = d * d;
    let rows: Vec<(&[usize], f64)> = vec![
        (
            &[1, 2],
            (18.0 * (l - 1.0) * l + 4.0) / (3.0 * l * (15.0 * l - 8.0)) * dd
                + (9.0 * (l - 2.0) * l + 8.0) / (3.0 * (8.0 - 15.0 * l) * l) * d
                + (18.0 * (l - 1.0) * l + 4.0) / (3.0 * l * (15.0 * l - 8.0)),
        ),
        (&[1, 3], (0.25 - 4.0 / (135.0 * l * l)) * dd + (8.0 / (135.0 * l * l) + 0.5) * d - 4.0 / (135.0 * l * l)),
        (
            &[1, 4],
            (18.0 * l * (3.0 * l + 1.0) - 16.0) / (567.0 * l * l) * dd
                + (32.0 / (567.0 * l * l) + 11.0 / 21.0) * d
                + (18.0 * l * (3.0 * l - 1.0) - 16.0) / (567.0 * l * l),
        ),
        (
            &[1, 5],
            9.0 * l / (8.0 - 60.0 * l) * dd + 9.0 * l / (15.0 * l - 2.0) * d + (6.0 - 9.0 * l) / (8.0 - 60.0 * l),
        ),
        (&[1, 6], (6.0 - 9.0 * l) / (8.0 - 24.0 * l)),
        (
            &[2, 3],
            (18.0 * l * (3.0 * l - 1.0) - 16.0) / (567.0 * l * l) * dd
                + (32.0 / (567.0 * l * l) + 11.0 / 21.0) * d
                + (18.0 * l * (3.0 * l + 1.0) - 16.0) / (567.0 * l * l),
        ),
        (&[2, 4], -(1.0 / (54.0 * l * l) + 0.25) * dd + (1.0 / (27.0 * l * l) + 1.0) * d - 1.0 / (54.0 * l * l)),
        (
            &[2, 5],
            36.0 * l / (8.0 - 87.0 * l) * dd + 90.0 * l / (87.0 * l - 8.0) * d + (6.0 - 9.0 * l) / (8.0 - 87.0 * l),
        ),
        (&[2, 6], (6.0 - 9.0 * l) / (8.0 - 15.0 * l)),
        (
            &[3, 4],
            (18.0 * l * (l + 1.0) + 4.0) / (3.0 * l * (15.0 * l + 8.0)) * dd
                + (9.0 / (15.0 * l + 8.0) - 5.0 / l - 3.0) / 15.0 * d
                + (18.0 * l * (l + 1.0) + 4.0) / (3.0 * l * (15.0 * l + 8.0)),
        ),
        (&[3, 5], (6.0 + 9.0 * l) / (8.0 + 24.0 * l)),
        (
            &[3, 6],
            -9.0 * l / (60.0 * l + 8.0) * dd + 9.0 * l / (15.0 * l + 2.0) * d + (9.0 * l + 6.0) / (60.0 * l + 8.0),
        ),
        (&[4, 5], (6.0 + 9.0 * l) / (8.0 + 15.0 * l)),
        (
            &[4, 6],
            -36.0 * l / (87.0 * l + 8.0) * dd + 90.0 * l / (87.0 * l + 8.0) * d + (9.0 * l + 6.0) / (87.0 * l + 8.0),
        ),
        (&[5, 6], -0.75 * dd + 1.5 * d),
        (
            &[1, 2, 5],
            9.0 * l * (8.0 - 21.0 * l) / (8.0 * (36.0 * l * l - 27.0 * l + 2.0)) * dd
                + 45.0 * l / (48.0 * l - 4.0) * d
                + (6.0 - 9.0 * l) / (8.0 - 96.0 * l),
        ),
    ];
    rows.into_iter().map(|(f, v)| (f.iter().map(|i| i - 1).collect(), v)).collect()
}

#[test]
fn lambda_face_critical_values() {
    let mut checked = 0;
    for l in [0.3, 0.5, 0.9, 2.0] {
        for d in [0.05, 0.2, 0.5] {
            let q = q_lambda(l, d).unwrap();
            let p = d6(d);
            for (face, want) in table5(l, d) {
                let Some(v) = restrict(&q, &p, &face, d).unwrap().value_at_critical else {
                    continue;
                };
                assert!(close(v, want, 1e-9 * (1.0 + want.abs())), "{face:?} l={l} d={d}: {v} vs {want}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 12 * 15, "{checked}");
}

#[test]
fn lambda_vertex_values() {
    for l in [0.3, 0.5, 2.0] {
        for d in [0.05, 0.5] {
            let q = q_lambda(l, d).unwrap();
            let want = [
                2.0 * (3.0 * l - 1.0) / (9.0 * l) * d * d - (3.0 * l - 4.0) / (9.0 * l) * d + (15.0 * l - 8.0) / (36.0 * l),
                (15.0 * l - 8.0) / (36.0 * l) * d * d - (3.0 * l - 4.0) / (9.0 * l) * d + (24.0 * l - 8.0) / (36.0 * l),
                2.0 * (3.0 * l + 1.0) / (9.0 * l) * d * d - (3.0 * l + 4.0) / (9.0 * l) * d + (15.0 * l + 8.0) / (36.0 * l),
                (15.0 * l + 8.0) / (36.0 * l) * d * d - (3.0 * l + 4.0) / (9.0 * l) * d + (24.0 * l + 8.0) / (36.0 * l),
                0.75,
                0.75,
                0.75 * d * d,
            ];
            for (v, w) in d6(d).vertex_coords(d).iter().zip(want) {
                assert!(close(q.eval(v), w, 1e-12));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimum_dominates_random_points(
        d in 0.02..0.98f64,
        l in 0.2..2.0f64,
        w in prop::collection::vec(0.0..1.0f64, 7),
    ) {
        let s: f64 = w.iter().sum();
        prop_assume!(s > 1e-6);
        let p = d6(d);
        let x: DVector<f64> = p.vertex_coords(d).iter().zip(&w).map(|(v, wi)| v * (wi / s)).sum();
        let q = q_lambda(l, d).unwrap();
        let lo = optimize(&q, &p, Sense::Min, d).unwrap().value;
        let hi = optimize(&q, &p, Sense::Max, d).unwrap().value;
        let v = q.eval(&x);
        prop_assert!(lo <= v + 1e-12 && v <= hi + 1e-12);
    }
}
