use opx_core::painleve::{
    dp1_forward_escape, dp1_positive_solution, lattice_flow, painleve_ode_residual, semiclassical_system_residual,
    structure_relation_check, verblunsky_sequence, wronskian_identities, Lattice, OdeQuantity, SemiclassicalFamily,
    WronskianBase,
};
use opx_core::{Mp, OpxError};

#[test]
fn fixed_point_matches_freud_recurrence() {
    for t in [0.0, 0.6, -0.5] {
        let s = dp1_positive_solution(t, 60, 1e-13).unwrap();
        let bits = 256;
        let rec = SemiclassicalFamily::Freud.recurrence(&Mp::from_f64(t, bits), 6, bits).unwrap();
        for n in 1..=6 {
            let a = rec.a2(n).to_f64();
            assert!((s.get(n) - a).abs() < 1e-10 * a, "t={t} n={n}: {} vs {a}", s.get(n));
        }
    }
}

#[test]
fn raw_recursion_is_unstable() {
    for t in [0.0, 1.0] {
        let s = dp1_positive_solution(t, 200, 1e-12).unwrap();
        assert!(s.x.iter().all(|&x| x > 0.0));
        for d in [1e-6, -1e-6] {
            let hit = dp1_forward_escape(t, s.get(1) + d, 50);
            assert!(matches!(hit, Some(k) if k <= 50), "t={t} d={d}: {hit:?}");
        }
    }
}

#[test]
fn structure_relation_constant() {
    let s = dp1_positive_solution(0.0, 40, 1e-13).unwrap();
    for n in 3..=7 {
        let r = structure_relation_check(0.0, n).unwrap();
        assert!(r.residual < 1e-30, "n={n}: {}", r.residual);
        let want = 4.0 * s.get(n) * s.get(n - 1) * s.get(n - 2);
        assert!((r.c_n - want).abs() < 1e-9 * want, "n={n}: {} vs {want}", r.c_n);
    }
}

#[test]
fn verblunsky_negative_for_negative_time() {
    for alpha in [1.0, 4.0] {
        let s = verblunsky_sequence(-2.0 / alpha, 15).unwrap();
        assert!(s.all_negative(), "alpha={alpha}: {:?}", s.alphas);
        assert!(s.alphas.iter().all(|a| a.abs() < 1.0));
        assert!(s.route_gap < 1e-10);
    }
}

#[test]
fn ode_residuals_are_second_order() {
    let cases = [
        (OdeQuantity::P4Freud, 2, 0.4),
        (OdeQuantity::P5Charlier { beta: 1.5 }, 2, 0.8),
        (OdeQuantity::P5Opuc, 1, 1.5),
        (OdeQuantity::P3ChenIts { alpha: 0.5 }, 1, 1.2),
        (OdeQuantity::P5Bce { alpha: 0.5, beta: 0.25 }, 2, 0.6),
    ];
    for (q, n, t) in cases {
        let r1 = painleve_ode_residual(q, n, t, 2e-3).unwrap().residual;
        let r2 = painleve_ode_residual(q, n, t, 1e-3).unwrap().residual;
        assert!(r2 < 1e-4, "{}: {r2}", q.name());
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() <= 1.0, "{} ratio {ratio}", q.name());
    }
}

#[test]
fn ode_pole_is_reported() {
    let err = painleve_ode_residual(OdeQuantity::P3ChenIts { alpha: 0.5 }, 1, 5e-4, 1e-3).unwrap_err();
    assert!(matches!(err, OpxError::Pole { .. }));
}

#[test]
fn discrete_systems_hold() {
    let cases = [
        (SemiclassicalFamily::Freud, 0.3),
        (SemiclassicalFamily::GenCharlier { beta: 1.5, c: 1.0 }, 0.2),
        (SemiclassicalFamily::GenMeixner { gamma: 1.5, beta: 1.0, a: 0.5 }, 0.1),
        (SemiclassicalFamily::ChenIts { alpha: 0.5 }, 0.8),
        (SemiclassicalFamily::OpucBessel, 1.0),
    ];
    for (fam, t) in cases {
        let r = semiclassical_system_residual(&fam, t, 5).unwrap();
        assert!(!r.rows.is_empty());
        assert!(r.max() < 1e-8, "{}: {}", r.family, r.max());
    }
    let err = semiclassical_system_residual(&SemiclassicalFamily::ExpLaguerre { alpha: 0.5 }, 0.2, 4).unwrap_err();
    assert!(matches!(err, OpxError::NoPrediction(_)));
}

#[test]
fn toda_for_meixner_scale() {
    let fam = SemiclassicalFamily::GenMeixner { gamma: 1.5, beta: 1.0, a: 0.5 };
    let f = lattice_flow(&fam, Lattice::Toda, 0.0, 0.5, 5, 5).unwrap();
    assert!(f.max_residual() < 1e-6, "{}", f.max_residual());
    assert!(f.discrepancy < 1e-5, "{}", f.discrepancy);
}

#[test]
fn wronskian_matches_moments_for_laguerre() {
    for n in 1..=4 {
        let w = wronskian_identities(WronskianBase::Laguerre { alpha: 1.5 }, 0.2, n, 1.0 / 256.0).unwrap();
        assert!(w.gap < 1e-8, "n={n}: {}", w.gap);
    }
}
