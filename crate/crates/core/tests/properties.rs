mod common;

use num_complex::Complex64 as Cx;
use painleve_torus::elliptic::{EllipticContext, Tau as TauOf};
use painleve_torus::green::green_grad;
use painleve_torus::hitchin::hitchin_wp;
use painleve_torus::{Context, Mat2, MonodromyParams, PVIIndex, Tau};
use proptest::prelude::*;

fn tau_strategy() -> impl Strategy<Value = Cx> {
    (-0.5f64..0.5, 0.8f64..1.8).prop_map(|(a, b)| Cx::new(a, b))
}

fn cell_point(tau: Cx, u: f64, v: f64) -> Cx {
    tau * v + u
}

fn ctx(t: Cx) -> Context {
    Context::new(Tau::new(t).unwrap()).unwrap()
}

fn rel(a: Cx, b: Cx) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn context_identities(t in tau_strategy()) {
        let r = ctx(t).residuals();
        prop_assert!(r.max() < 1e-10, "{:?}", r);
    }

    #[test]
    fn wp_parity_and_periods(t in tau_strategy(), u in -0.45f64..0.45, v in -0.45f64..0.45) {
        let z = cell_point(t, u, v);
        prop_assume!(z.norm() > 0.05);
        let c = ctx(t);
        let a = c.values(z).unwrap();
        let m = c.values(-z).unwrap();
        prop_assert!(rel(m.wp, a.wp) < 1e-10);
        prop_assert!(rel(m.dwp, -a.dwp) < 1e-10);
        prop_assert!(rel(m.zeta, -a.zeta) < 1e-10);
        let s1 = c.values(z + 1.0).unwrap();
        let st = c.values(z + t).unwrap();
        prop_assert!(rel(s1.wp, a.wp) < 1e-10);
        prop_assert!(rel(st.wp, a.wp) < 1e-10);
        prop_assert!((s1.zeta - a.zeta - c.eta1).norm() < 1e-10 * a.zeta.norm().max(1.0));
        prop_assert!((st.zeta - a.zeta - c.eta2).norm() < 1e-10 * a.zeta.norm().max(1.0));
    }

    #[test]
    fn wp_differential_equation(t in tau_strategy(), u in -0.5f64..0.5, v in -0.5f64..0.5) {
        let z = cell_point(t, u, v);
        prop_assume!(z.norm() > 0.05);
        let c = ctx(t);
        let a = c.values(z).unwrap();
        let rhs = a.wp.powi(3) * 4.0 - c.g2 * a.wp - c.g3;
        prop_assert!(rel(a.dwp * a.dwp, rhs) < 1e-8);
    }

    #[test]
    fn invert_wp_round_trips(t in tau_strategy(), u in -0.45f64..0.45, v in -0.45f64..0.45) {
        let z = cell_point(t, u, v);
        prop_assume!(z.norm() > 0.05);
        let c = ctx(t);
        let w = c.wp(z).unwrap().0;
        let p = c.invert_wp(w).unwrap();
        prop_assert!(rel(c.wp(p.z).unwrap().0, w) < 1e-9);
        let d = c.torus_dist(p.z, z).min(c.torus_dist(p.z, -z));
        prop_assert!(d < 1e-7, "{}", d);
    }

    #[test]
    fn lattice_reduction_is_idempotent(t in tau_strategy(), x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let c = ctx(t);
        let z = Cx::new(x, y);
        let a = c.lattice_reduce(z);
        let b = c.lattice_reduce(a.z);
        prop_assert!((a.z - b.z).norm() < 1e-12);
        prop_assert!((0.0..1.0).contains(&a.r) && (0.0..1.0).contains(&a.s));
        prop_assert!(c.torus_dist(a.z, z) < 1e-12);
    }

    #[test]
    fn green_gradient_odd_and_periodic(t in tau_strategy(), u in -0.45f64..0.45, v in -0.45f64..0.45) {
        let z = cell_point(t, u, v);
        prop_assume!(z.norm() > 0.05);
        let c = ctx(t);
        let g = green_grad(&c, z).unwrap();
        prop_assert!(rel(green_grad(&c, -z).unwrap(), -g) < 1e-10);
        prop_assert!(rel(green_grad(&c, z + 1.0).unwrap(), g) < 1e-10);
        prop_assert!(rel(green_grad(&c, z + t).unwrap(), g) < 1e-10);
    }

    #[test]
    fn hitchin_is_invariant_under_sign_and_shift(t in tau_strategy(), r in 0.05f64..0.45, s in 0.05f64..0.95) {
        let c = ctx(t);
        let Ok(w) = hitchin_wp(&c, &MonodromyParams::real(r, s).unwrap()) else {
            return Ok(());
        };
        let neg = hitchin_wp(&c, &MonodromyParams::real(-r, -s).unwrap()).unwrap();
        let shift = hitchin_wp(&c, &MonodromyParams::real(r + 1.0, s - 1.0).unwrap()).unwrap();
        prop_assert!(rel(neg, w) < 1e-8);
        prop_assert!(rel(shift, w) < 1e-8);
    }

    #[test]
    fn det_is_multiplicative(v in proptest::collection::vec(-2.0f64..2.0, 16)) {
        let c = |k: usize| Cx::new(v[2 * k], v[2 * k + 1]);
        let a = Mat2::new(c(0), c(1), c(2), c(3));
        let b = Mat2::new(c(4), c(5), c(6), c(7));
        let lhs = (a * b).det();
        prop_assert!((lhs - a.det() * b.det()).norm() < 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn index_text_round_trip(n in proptest::array::uniform4(0u32..5)) {
        let idx = PVIIndex::new(n);
        let back: PVIIndex = idx.to_string().parse().unwrap();
        prop_assert_eq!(back, idx);
        for k in 0..4 {
            let two_n = 2 * i64::from(n[k]) + 1;
            prop_assert_eq!(idx.alpha(k), num_rational::Ratio::new(two_n * two_n, 8));
        }
    }
}

#[test]
fn single_precision_agrees_with_double() {
    let t64 = Cx::new(0.2, 1.1);
    let c64 = ctx(t64);
    let c32 = EllipticContext::<f32>::new(TauOf::from_parts(0.2f32, 1.1).unwrap()).unwrap();
    for (x, y) in [(0.13f32, 0.21f32), (0.4, -0.3), (-0.27, 0.45)] {
        let z32 = num_complex::Complex32::new(x, y);
        let z64 = Cx::new(f64::from(x), f64::from(y));
        let a = c32.values(z32).unwrap();
        let b = c64.values(z64).unwrap();
        let wp = Cx::new(f64::from(a.wp.re), f64::from(a.wp.im));
        assert!(rel(wp, b.wp) < 1e-4);
    }
    assert!(c32.residuals().max() < 1e-3);
}
