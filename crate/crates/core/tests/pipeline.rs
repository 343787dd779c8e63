mod common;

use common::*;
use num_complex::Complex64 as Cx;
use painleve_torus::gle::{classify, is_unitary, monodromy, MonodromyClass};
use painleve_torus::green::{find_critical_points, gp_grad, CriticalKind};
use painleve_torus::hitchin::{
    hamiltonian_flow, hitchin_p, omega_membership, omega_scan, solution_p, solution_state,
};
use painleve_torus::output::{region_json, write_region_csv};
use painleve_torus::{
    ContextFamily, Error, GLEParams, MonodromyParams, PVIIndex, SingularPair, Tau,
};

fn recover(tau: Cx, r: f64, s: f64, index: PVIIndex) -> (f64, f64) {
    let fam = ContextFamily::new(1e-10);
    let t = Tau::new(tau).unwrap();
    let ctx = fam.at(tau).unwrap();
    let mp = MonodromyParams::real(r, s).unwrap();
    let st = solution_state(&fam, &mp, index, t, 1e-3).unwrap();
    let g = GLEParams::new(&ctx, index, st.p, st.a).unwrap();
    let rep = monodromy(&ctx, &g, None).unwrap();
    let res = rep.residuals();
    assert!(res.max_det() < 1e-9, "{res:?}");
    assert!(res.commutator < 1e-6 && res.gamma_plus < 1e-6 && res.gamma_minus < 1e-6);
    is_unitary(&rep, 1e-6).expect("unitary")
}

fn same_up_to_sign(got: (f64, f64), r: f64, s: f64, tol: f64) -> bool {
    let d = |a: f64, b: f64| {
        let x = (a - b).rem_euclid(1.0);
        x.min(1.0 - x)
    };
    (d(got.0, r) < tol && d(got.1, s) < tol) || (d(got.0, -r) < tol && d(got.1, -s) < tol)
}

#[test]
fn monodromy_recovers_hitchin_data() {
    let mut rng = rng(21);
    for _ in 0..4 {
        let tau = random_tau(&mut rng);
        let (r, s) = random_rs(&mut rng, 0.08);
        let got = recover(tau, r, s, PVIIndex::ZERO);
        assert!(
            same_up_to_sign(got, r, s, 1e-6),
            "{got:?} vs ({r}, {s}) at {tau}"
        );
    }
}

#[test]
fn okamoto_lift_keeps_monodromy_data() {
    let got = recover(Cx::new(0.2, 1.1), 0.3, 0.2, PVIIndex::ONE_000);
    assert!(same_up_to_sign(got, 0.3, 0.2, 1e-6), "{got:?}");
}

#[test]
fn detuned_b_breaks_apparentness() {
    let fam = ContextFamily::new(1e-10);
    let tau = Cx::new(0.0, 1.0);
    let ctx = fam.at(tau).unwrap();
    let mp = MonodromyParams::real(0.3, 0.2).unwrap();
    let st = solution_state(&fam, &mp, PVIIndex::ZERO, Tau::new(tau).unwrap(), 1e-3).unwrap();
    let g = GLEParams::new(&ctx, PVIIndex::ZERO, st.p, st.a).unwrap();
    let break_at = |d: f64| {
        let r = monodromy(&ctx, &g.detuned(Cx::new(d, 0.0)), None)
            .unwrap()
            .residuals();
        r.gamma_plus.max(r.gamma_minus)
    };
    let (a, b) = (break_at(1e-3), break_at(2e-3));
    assert!(a > 1e-4);
    assert!((b / a - 2.0).abs() < 0.05, "{a} {b}");
}

#[test]
fn generic_data_is_not_completely_reducible_or_unitary() {
    let fam = ContextFamily::new(1e-10);
    let tau = Cx::new(0.1, 1.2);
    let ctx = fam.at(tau).unwrap();
    let g = GLEParams::new(&ctx, PVIIndex::ZERO, Cx::new(0.27, 0.41), Cx::new(0.9, 0.4)).unwrap();
    let rep = monodromy(&ctx, &g, None).unwrap();
    assert!(rep.residuals().gamma_plus < 1e-6);
    match classify(&rep).unwrap() {
        MonodromyClass::CompletelyReducible { r, s } => {
            assert!(r.im.abs() > 1e-4 || s.im.abs() > 1e-4)
        }
        MonodromyClass::NotCompletelyReducible { .. } => {}
    }
    assert!(is_unitary(&rep, 1e-6).is_none());
}

#[test]
fn flow_tracks_explicit_solution() {
    let fam = ContextFamily::new(1e-10);
    let mp = MonodromyParams::real(0.41, 0.17).unwrap();
    let t0 = Tau::from_parts(-0.1, 1.0).unwrap();
    let t1 = Tau::from_parts(0.05, 1.15).unwrap();
    let st = solution_state(&fam, &mp, PVIIndex::ZERO, t0, 1e-3).unwrap();
    let path = hamiltonian_flow(&fam, PVIIndex::ZERO, &st, t1, 3).unwrap();
    assert_eq!(path.len(), 4);
    for s in &path[1..] {
        let ctx = fam.at(s.tau.value()).unwrap();
        let (p, _) = hitchin_p(&ctx, &mp).unwrap();
        let d = ctx.torus_dist(s.p, p.z).min(ctx.torus_dist(s.p, -p.z));
        assert!(d < 1e-7, "{d}");
    }
}

#[test]
fn witness_round_trip_on_square_torus() {
    let fam = ContextFamily::new(1e-10);
    let ctx = fam.at(Cx::new(0.0, 1.0)).unwrap();
    let mp = MonodromyParams::real(0.31, 0.12).unwrap();
    let (p, _) = hitchin_p(&ctx, &mp).unwrap();
    let pair = SingularPair::new(&ctx, p.z).unwrap();
    assert!(gp_grad(&ctx, &pair, mp.point(&ctx)).unwrap().norm() < 1e-8);
    let w = omega_membership(&ctx, &pair, PVIIndex::ZERO)
        .unwrap()
        .expect("member");
    let (q, _) = hitchin_p(&ctx, &w.params).unwrap();
    assert!(ctx.torus_dist(q.z, p.z).min(ctx.torus_dist(q.z, -p.z)) < 1e-6);
    let crit = find_critical_points(&ctx, Some(&pair), 10).unwrap();
    assert!(crit.iter().any(|c| c.kind == CriticalKind::Nontrivial));
}

#[test]
fn okamoto_membership_finds_seed() {
    let fam = ContextFamily::new(1e-10);
    let ctx = fam.at(Cx::new(0.0, 1.0)).unwrap();
    let mp = MonodromyParams::real(0.37, 0.21).unwrap();
    let (p, _) = solution_p(&ctx, &mp, PVIIndex::ONE_000).unwrap();
    let pair = SingularPair::new(&ctx, p.z).unwrap();
    let w = omega_membership(&ctx, &pair, PVIIndex::ONE_000)
        .unwrap()
        .expect("member");
    assert!(w.residual < 1e-6);
}

#[test]
fn scan_writes_consistent_tables() {
    let fam = ContextFamily::new(1e-10);
    let ctx = fam.at(Cx::new(0.0, 1.0)).unwrap();
    let scan = omega_scan(&ctx, PVIIndex::ZERO, 16).unwrap();
    let mut buf = Vec::new();
    write_region_csv(&scan, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "r_cell,s_cell,member,witness_r,witness_s,residual,excluded"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 256);
    let members = rows
        .iter()
        .filter(|l| l.split(',').nth(2) == Some("1"))
        .count();
    assert_eq!(members, scan.member_count());
    let json: serde_json::Value = serde_json::from_str(&region_json(&scan).unwrap()).unwrap();
    assert_eq!(json["cells"].as_array().unwrap().len(), 256);
    assert_eq!(json["member_count"].as_u64().unwrap() as usize, members);
    // Deterministic output.
    let again = omega_scan(&ctx, PVIIndex::ZERO, 16).unwrap();
    assert_eq!(region_json(&again).unwrap(), region_json(&scan).unwrap());
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(
        Tau::from_parts(0.0, -1.0),
        Err(Error::InvalidTau { .. })
    ));
    assert!(matches!(
        MonodromyParams::real(0.5, 0.0),
        Err(Error::HalfLatticeInput)
    ));
    let fam = ContextFamily::new(1e-10);
    let ctx = fam.at(Cx::new(0.0, 1.0)).unwrap();
    assert!(matches!(
        SingularPair::new(&ctx, Cx::new(0.5, 0.5)),
        Err(Error::HalfPeriodInput)
    ));
    assert!(omega_scan(&ctx, PVIIndex::ZERO, 8).is_err());
    let bad = PVIIndex::new([0, 2, 0, 0]);
    let mp = MonodromyParams::real(0.3, 0.2).unwrap();
    assert!(matches!(
        solution_p(&ctx, &mp, bad),
        Err(Error::UnsupportedIndex(_))
    ));
}
