use super::*;
use crate::polytope::DelzantPolytope;
use crate::potential::{NewtonConfig, Profile};
use approx::assert_relative_eq;
use proptest::prelude::*;
use std::sync::Arc;

fn potential(name: &str, h: f64, profile: Profile) -> SymplecticPotential {
    let p = Arc::new(DelzantPolytope::preset(name).unwrap());
    let g = Arc::new(PolytopeGrid::new(&p, h).unwrap());
    SymplecticPotential::from_profile(p, g, profile).unwrap()
}

fn frame(sp0: &SymplecticPotential) -> ReferenceFrame {
    ReferenceFrame::new(sp0.clone(), NewtonConfig::default()).unwrap()
}

fn find<'a>(a: &'a SnapshotAudit, name: &str) -> &'a AuditResult {
    a.audits
        .iter()
        .find(|x| x.name == name)
        .unwrap_or_else(|| panic!("no audit {name}"))
}

#[test]
fn zero_potential_audits() {
    let sp0 = potential("square", 0.125, Profile::None);
    let fr = frame(&sp0);
    let a = SnapshotAudit::compute(&fr, 0.0, &sp0, &AuditOptions::default()).unwrap();
    assert!(a.passed(), "{:?}", a.failures().collect::<Vec<_>>());
    for name in [
        "two_integral",
        "chen_distance",
        "max_phi_upper",
        "max_phi_lower",
        "l1_chain",
    ] {
        let r = find(&a, name);
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0), "{name}");
    }
    assert_relative_eq!(find(&a, "trace_positivity").rhs, 2.0, epsilon = 1e-12);
    let g = find(&a, "gradient_energy");
    assert!(!g.enforced && g.note.as_deref() == Some("c0 precondition fails"));
}

#[test]
fn constant_shift_audits() {
    let c = 0.2;
    let sp0 = potential("square", 0.0625, Profile::None);
    let sp = sp0.plus_affine(&[0.0, 0.0], -c).unwrap();
    let fr = frame(&sp0);
    let vol = fr.convention.x_volume();
    let a = SnapshotAudit::compute(&fr, 0.0, &sp, &AuditOptions::default()).unwrap();
    assert!(a.passed(), "{:?}", a.failures().collect::<Vec<_>>());
    let two = find(&a, "two_integral");
    assert_relative_eq!(two.lhs, c * c * vol, max_relative = 1e-8);
    assert_relative_eq!(two.rhs, c * c * vol, max_relative = 1e-12);
    let chen = find(&a, "chen_distance");
    assert_relative_eq!(chen.rhs, c * vol.sqrt(), max_relative = 1e-12);
    assert_relative_eq!(chen.lhs, c * vol.sqrt(), max_relative = 1e-8);
    let up = find(&a, "max_phi_upper");
    assert_relative_eq!(up.lhs, c, epsilon = 1e-9);
    assert_relative_eq!(up.rhs, c, epsilon = 1e-12);
    assert_relative_eq!(find(&a, "trace_positivity").rhs, 2.0, epsilon = 1e-9);
    let g = find(&a, "gradient_energy");
    assert!(g.enforced && g.pass && g.lhs.abs() < 1e-15);
    let m = a.moser.as_ref().unwrap();
    assert!(m.norms.iter().all(|v| (v - 1.0).abs() < 1e-8));
}

#[test]
fn perturbed_snapshots_pass() {
    for (name, h, amp) in [
        ("interval", 1.0 / 32.0, 0.05),
        ("square", 1.0 / 16.0, 2.0),
        ("simplex", 1.0 / 32.0, 5.0),
    ] {
        let sp0 = potential(name, h, Profile::None);
        let sp = potential(name, h, Profile::Bump { amplitude: amp });
        let a = SnapshotAudit::compute(&frame(&sp0), 0.0, &sp, &AuditOptions::default()).unwrap();
        assert!(
            a.passed(),
            "{name}: {:#?}",
            a.failures().collect::<Vec<_>>()
        );
    }
}

#[test]
fn gradient_energy_away_from_zero() {
    let sp0 = potential("interval", 1.0 / 32.0, Profile::None);
    let sp = potential("interval", 1.0 / 32.0, Profile::Bump { amplitude: 0.2 })
        .plus_affine(&[0.0], -0.5)
        .unwrap();
    let a = SnapshotAudit::compute(&frame(&sp0), 0.0, &sp, &AuditOptions::default()).unwrap();
    let g = find(&a, "gradient_energy");
    assert!(
        g.enforced && g.pass && g.margin > 0.0 && g.lhs > 0.0,
        "{g:?}"
    );
}

#[test]
fn broken_convexity_is_named() {
    let sp0 = potential("interval", 1.0 / 32.0, Profile::None);
    let bad = potential("interval", 1.0 / 32.0, Profile::Bump { amplitude: -300.0 });
    let a = SnapshotAudit::compute(&frame(&sp0), 0.0, &bad, &AuditOptions::default()).unwrap();
    assert!(!a.passed());
    assert!(find(&a, "hessian_positivity").is_failure());
}

#[test]
fn sobolev_examples() {
    let sp0 = potential("square", 0.0625, Profile::None);
    let fr = frame(&sp0);
    let rel = fr.relative(&sp0).unwrap();
    let geo = SampleGeometry::new(&rel, &fr.convention).unwrap();
    let ctx = SobolevContext::new(sp0.grid(), &geo, Measure::Reference, fr.convention.kappa);
    let one = vec![1.0; rel.len()];
    assert_relative_eq!(
        ctx.quotient(&one).unwrap(),
        fr.convention.x_volume().powf(-0.25),
        max_relative = 1e-12
    );
    let probes = probe_family(sp0.grid(), 3, 6, None);
    let f = &probes[5];
    let twice: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
    assert_relative_eq!(
        ctx.quotient(f).unwrap(),
        ctx.quotient(&twice).unwrap(),
        max_relative = 1e-12
    );
    let est = estimate_sobolev(&ctx, &probes).unwrap();
    assert!(est.constant > 0.0 && est.history.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(probe_family(sp0.grid(), 3, 6, None), probes);
    assert!(ctx.quotient(&vec![0.0; rel.len()]).is_err());
}

#[test]
fn moser_examples() {
    let w = vec![0.5, 0.25, 0.25];
    let m = moser_ladder(&[1.0; 3], &w, 2, 64.0).unwrap();
    assert_eq!(m.exponents, vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);
    assert!(m.norms.iter().all(|v| (v - 1.0).abs() < 1e-15));
    for (c, q) in m.constants.iter().zip(&m.exponents) {
        assert_relative_eq!(c * q, 1.0, epsilon = 1e-12);
    }
    assert_eq!(
        moser_ladder(&[1.0; 3], &w, 3, 64.0)
            .unwrap()
            .exponents
            .len(),
        9
    );
    assert!(moser_ladder(&[0.5, 1.0, 1.0], &w, 2, 64.0).is_err());
    assert!(moser_ladder(&[1.0, 3.0, 2.0], &w, 2, 1e9).unwrap().capped);
}

#[test]
fn d_conservation_is_relative_to_phi() {
    let ok = audit_d_conservation(&[(0.0, 0.0, 0.0), (1.0, 1e-4, 1e-2), (2.0, -1.9e-4, 1e-2)]);
    assert!(ok.iter().all(|a| a.pass));
    let bad = audit_d_conservation(&[(0.0, 0.0, 0.0), (1.0, 3e-4, 1e-2)]);
    assert!(!bad[1].pass);
    assert!(audit_d_conservation(&[]).is_empty());
}

#[test]
fn dyadic_pairing() {
    let t = [0.0, 0.5, 1.0, 1.5, 2.0, 2.2];
    assert_eq!(dyadic_triples(&t).unwrap(), vec![(1, 2), (2, 4)]);
    assert!(dyadic_triples(&[0.0, 0.5, 0.7, 1.5]).is_err());
}

proptest! {
    #[test]
    fn pass_iff_margin_within_slack(lhs in -1e3f64..1e3, rhs in -1e3f64..1e3, slack in 0.0f64..10.0) {
        let a = AuditResult::check("x", lhs, rhs, slack);
        prop_assert_eq!(a.pass, a.margin >= -a.slack);
        prop_assert_eq!(a.margin, rhs - lhs);
    }

    #[test]
    fn moser_norms_nondecreasing(vals in proptest::collection::vec(1.0f64..5.0, 2..40)) {
        let w = vec![1.0 / vals.len() as f64; vals.len()];
        let m = moser_ladder(&vals, &w, 2, 64.0).unwrap();
        for p in m.norms.windows(2) {
            prop_assert!(p[1] >= p[0] * (1.0 - 1e-12));
        }
        prop_assert!(*m.norms.last().unwrap() <= m.sup * (1.0 + 1e-12));
    }
}
