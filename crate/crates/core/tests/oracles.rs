mod common;

use common::*;
use num_complex::Complex64 as Cx;
use painleve_torus::gle::GLEParams;
use painleve_torus::green::green_grad;
use painleve_torus::hitchin::{a_from_hitchin, hitchin_p, solution_state};
use painleve_torus::{Context, ContextFamily, MonodromyParams, PVIIndex, Tau};

fn ctx(t: Cx) -> Context {
    Context::new(Tau::new(t).unwrap()).unwrap()
}

#[test]
fn theta_series_matches_row_sums() {
    let mut rng = rng(11);
    for _ in 0..8 {
        let t = random_tau(&mut rng);
        let c = ctx(t);
        for _ in 0..25 {
            let z = random_z(&mut rng, t, 0.05);
            let v = c.values(z).unwrap();
            let (wp, zeta) = lattice_wp_zeta(t, z, 200);
            assert!((v.wp - wp).norm() <= 1e-9 * wp.norm().max(1.0), "wp at {z}");
            assert!(
                (v.zeta - zeta).norm() <= 1e-9 * zeta.norm().max(1.0),
                "zeta at {z}"
            );
        }
    }
}

#[test]
fn quasi_periods_match_row_sums() {
    let t = Cx::new(0.17, 1.23);
    let c = ctx(t);
    let z = Cx::new(0.21, 0.33);
    let (_, z0) = lattice_wp_zeta(t, z, 200);
    let (_, z1) = lattice_wp_zeta(t, z + 1.0, 200);
    let (_, z2) = lattice_wp_zeta(t, z + t, 200);
    assert!((z1 - z0 - c.eta1).norm() < 1e-9);
    assert!((z2 - z0 - c.eta2).norm() < 1e-9);
}

#[test]
fn square_partial_sums_agree_loosely() {
    let t = Cx::new(0.0, 1.0);
    let c = ctx(t);
    let z = Cx::new(0.23, 0.31);
    let brute = brute_wp(t, z, 400);
    assert!((c.wp(z).unwrap().0 - brute).norm() < 1e-3);
}

#[test]
fn green_gradient_matches_theta_product() {
    let mut rng = rng(12);
    for _ in 0..5 {
        let t = random_tau(&mut rng);
        let c = ctx(t);
        for _ in 0..10 {
            let z = random_z(&mut rng, t, 0.1);
            let fd = green_grad_fd(t, z, 1e-3);
            let g = green_grad(&c, z).unwrap();
            assert!(
                (g - fd).norm() < 1e-7 * g.norm().max(1.0),
                "{g} vs {fd} at {z}"
            );
        }
    }
}

#[test]
fn a_matches_zeta_addition_closed_form() {
    let fam = ContextFamily::new(1e-10);
    let mut rng = rng(13);
    for _ in 0..6 {
        let t = random_tau(&mut rng);
        let tau = Tau::new(t).unwrap();
        let c = fam.at(t).unwrap();
        let (r, s) = random_rs(&mut rng, 0.1);
        let mp = MonodromyParams::real(r, s).unwrap();
        let Ok((p, _)) = hitchin_p(&c, &mp) else {
            continue;
        };
        let a = mp.point(&c);
        let exact =
            (c.wzeta(a + p.z).unwrap() - c.wzeta(a - p.z).unwrap() - c.wzeta(p.z * 2.0).unwrap())
                * 0.5;
        let fd = a_from_hitchin(&fam, &mp, tau, 1e-3).unwrap();
        assert!((fd - exact).norm() < 1e-5 * exact.norm().max(1.0));
        let st = solution_state(&fam, &mp, PVIIndex::ZERO, tau, 1e-3).unwrap();
        assert!((st.a - exact).norm() < 1e-9 * exact.norm().max(1.0));
    }
}

#[test]
fn apparent_b_matches_frobenius_condition() {
    // Near p, I = ¾/d² − A/d + I₀ + O(d); exponents −½ and 3/2 carry no
    // logarithm exactly when I₀ = A².
    let c = ctx(Cx::new(0.2, 1.1));
    let g = GLEParams::new(&c, PVIIndex::ZERO, Cx::new(0.31, 0.27), Cx::new(0.4, -0.2)).unwrap();
    let regular = |d: Cx| {
        let i = painleve_torus::gle::potential(&c, &g, g.p.z + d).unwrap();
        i - d.powi(-2) * 0.75 + g.a / d
    };
    let even = |h: f64| (regular(Cx::new(h, 0.0)) + regular(Cx::new(-h, 0.0))) * 0.5;
    let i0 = (even(2.5e-3) * 4.0 - even(5e-3)) / 3.0;
    assert!((g.a * g.a - i0).norm() < 1e-7);
    let detuned = g.detuned(Cx::new(1e-3, 0.0));
    let shifted = painleve_torus::gle::potential(&c, &detuned, g.p.z + 0.01).unwrap()
        - painleve_torus::gle::potential(&c, &g, g.p.z + 0.01).unwrap();
    assert!((shifted - 1e-3).norm() < 1e-12);
}
