use pinch4_core::curvature::{
    certificate_margin, certify_sign, euler_form, i_lambda, make_operator, pinch_certificate, project_einstein, sec,
    signature_form, Bivector, CurvOp, DEFAULT_TOL,
};
use pinch4_core::oracle::sample_pinched;
use pinch4_core::quadforms::q_lambda;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn arb_op() -> impl Strategy<Value = CurvOp> {
    (
        -2.0..2.0f64,
        prop::array::uniform2(-1.0..1.0f64),
        prop::array::uniform2(-1.0..1.0f64),
        prop::array::uniform3(prop::array::uniform3(-1.0..1.0f64)),
    )
        .prop_map(|(u, a, b, c)| make_operator(u, [a[0], a[1], -a[0] - a[1]], [b[0], b[1], -b[0] - b[1]], c).unwrap())
}

fn unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / n)
}

proptest! {
    #[test]
    fn canonical_form_invariants(r in arb_op()) {
        for w in [r.wplus, r.wminus] {
            prop_assert!((w[0] + w[1] + w[2]).abs() <= 1e-12);
            prop_assert!(w[0] <= w[1] && w[1] <= w[2]);
        }
    }

    #[test]
    fn orientation_reversal(r in arb_op()) {
        let s = r.reverse_orientation();
        prop_assert!((euler_form(&s) - euler_form(&r)).abs() <= 1e-12);
        prop_assert!((signature_form(&s) + signature_form(&r)).abs() <= 1e-12);
    }

    #[test]
    fn degree_two_homogeneity(r in arb_op(), l in 0.05..3.0f64) {
        let n = r.neg();
        let gap = i_lambda(&n, l).unwrap() - i_lambda(&r, l).unwrap();
        prop_assert!(gap.abs() <= 1e-12 * (1.0 + 1.0 / l));
        prop_assert!((signature_form(&n) - signature_form(&r)).abs() <= 1e-12);
    }

    #[test]
    fn projection_keeps_einstein_part(r in arb_op()) {
        let p = project_einstein(&r);
        prop_assert_eq!(p.c, [[0.0; 3]; 3]);
        prop_assert_eq!((p.u, p.wplus, p.wminus), (r.u, r.wplus, r.wminus));
        prop_assert_eq!(project_einstein(&p), p);
    }

    #[test]
    fn feasible_certificates_have_small_margins(r in arb_op(), d in 0.05..1.0f64) {
        let c = pinch_certificate(&r, d, DEFAULT_TOL).unwrap();
        if c.feasible {
            prop_assert!(c.margin1 >= -DEFAULT_TOL && c.margin2 >= -DEFAULT_TOL);
        }
    }

    #[test]
    fn algebraic_hopf(r in arb_op(), t in -3.0..3.0f64) {
        // any t with R + t·* ⪰ 0 forces χ̲(R) ≥ 0
        for sign in [1i8, -1] {
            let m = certificate_margin(&r, 0.0, t, sign, false);
            if m >= -1e-10 {
                prop_assert!(euler_form(&r) >= -1e-9);
            }
        }
    }
}

#[test]
fn model_values() {
    let s4 = CurvOp::identity();
    let cp2 = CurvOp::complex_projective_plane();
    assert_eq!(euler_form(&s4), 0.75);
    assert_eq!(signature_form(&s4), 0.0);
    assert_eq!(euler_form(&cp2), 6.0);
    assert_eq!(signature_form(&cp2), 2.0);
    assert_eq!(i_lambda(&s4, 0.5).unwrap(), 0.75);
    assert!(i_lambda(&cp2, 1.0 / 3.0).unwrap().abs() < 1e-14);
    assert_eq!(i_lambda(&cp2, 0.5).unwrap(), 2.0);
}

#[test]
fn cp2_sectional_range() {
    let cp2 = CurvOp::complex_projective_plane();
    let top = sec(&cp2, &Bivector { h: [0.0, 0.0, 1.0], k: [0.0, 1.0, 0.0] }).unwrap();
    let bottom = sec(&cp2, &Bivector { h: [1.0, 0.0, 0.0], k: [1.0, 0.0, 0.0] }).unwrap();
    assert_eq!((top, bottom), (4.0, 1.0));
}

/// Every certified operator has all sampled sectional curvatures in [δ, 1].
#[test]
fn certified_operators_are_pinched_on_random_planes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in [0.2, 0.5] {
        let ops = sample_pinched(d, 200, 3).unwrap();
        for r in ops.iter().step_by(20) {
            assert!(certify_sign(r, d, DEFAULT_TOL, 1).unwrap().feasible);
            for _ in 0..1000 {
                let plane = Bivector { h: unit(&mut rng), k: unit(&mut rng) };
                let s = sec(r, &plane).unwrap();
                assert!(s >= d - 1e-8 && s <= 1.0 + 1e-8, "sec {s} outside [{d}, 1]");
            }
        }
    }
}

#[test]
fn projection_preserves_pinching() {
    for d in [0.2, 0.35] {
        for r in sample_pinched(d, 1000, 8).unwrap().iter().step_by(10) {
            assert!(pinch_certificate(&project_einstein(r), d, DEFAULT_TOL).unwrap().feasible);
        }
    }
}

/// I_λ(R) is bounded below by Q_λ at (w₁⁺, w₂⁺, w₁⁻, w₂⁻, u, t₁).
#[test]
fn q_lambda_dominated_pointwise() {
    let d = 0.3;
    let ops = sample_pinched(d, 10_000, 21).unwrap();
    for l in [0.3, 0.5, 1.0] {
        let q = q_lambda(l, d).unwrap();
        for r in ops.iter().step_by(5) {
            let c = certify_sign(r, d, DEFAULT_TOL, 1).unwrap();
            let x = [r.wplus[0], r.wplus[1], r.wminus[0], r.wminus[1], r.u, c.t1];
            assert!(i_lambda(r, l).unwrap() >= q.eval_slice(&x) - 1e-9);
        }
    }
}

#[test]
fn json_rejects_non_traceless() {
    let bad = r#"{"u":1.0,"wplus":[0.0,0.0,1.0],"wminus":[0.0,0.0,0.0],"c":[0,0,0,0,0,0,0,0,0]}"#;
    assert!(serde_json::from_str::<CurvOp>(bad).is_err());
}
