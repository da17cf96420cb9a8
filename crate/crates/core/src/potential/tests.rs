use super::*;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn setup(name: &str, h: f64) -> (Arc<DelzantPolytope>, Arc<PolytopeGrid>) {
    let p = Arc::new(DelzantPolytope::preset(name).unwrap());
    let g = Arc::new(PolytopeGrid::new(&p, h).unwrap());
    (p, g)
}

fn canonical(name: &str, h: f64) -> SymplecticPotential {
    let (p, g) = setup(name, h);
    SymplecticPotential::canonical(p, g).unwrap()
}

fn node_at(g: &PolytopeGrid, x: &[f64]) -> usize {
    let idx = g.nearest_node(x);
    assert!(g
        .coords(idx)
        .iter()
        .zip(x)
        .all(|(a, b)| (a - b).abs() < 1e-12));
    idx
}

#[test]
fn canonical_interval_values() {
    let sp = canonical("interval", 0.125);
    assert_relative_eq!(
        sp.value(&[0.5]).unwrap(),
        -(2f64.ln()) / 2.0,
        epsilon = 1e-15
    );
    let (_, g, hm) = sp.eval(&[0.5]).unwrap();
    assert_relative_eq!(g[0], 0.0, epsilon = 1e-15);
    assert_relative_eq!(hm[(0, 0)], 2.0, epsilon = 1e-14);
    let idx = node_at(sp.grid(), &[0.25]);
    assert_relative_eq!(sp.hessian(idx).unwrap()[(0, 0)], 8.0 / 3.0, epsilon = 1e-14);
}

#[test]
fn canonical_square_and_simplex_hessians() {
    let sp = canonical("square", 0.25);
    let h = sp.hessian(node_at(sp.grid(), &[0.5, 0.5])).unwrap();
    assert_relative_eq!(
        h,
        DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]),
        epsilon = 1e-14
    );

    // 1/2 (e1 e1^T / x + e2 e2^T / y + (1,1)(1,1)^T / (1 - x - y)) at (1/3, 1/3)
    let sp = canonical("simplex", 0.125);
    let (_, _, h) = sp.eval(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
    assert_relative_eq!(
        h,
        DMatrix::from_row_slice(2, 2, &[3.0, 1.5, 1.5, 3.0]),
        epsilon = 1e-13
    );
}

#[test]
fn boundary_evaluation_fails() {
    let sp = canonical("interval", 0.125);
    assert!(matches!(
        sp.eval(&[0.0]),
        Err(Error::NonPositiveFacetDistance { facet: 0, .. })
    ));
    assert!(sp.eval(&[1.2]).is_err());
}

#[test]
fn added_quadratic_shifts_hessian_by_one() {
    let (p, g) = setup("interval", 0.0625);
    let base = SymplecticPotential::canonical(p.clone(), g.clone()).unwrap();
    let sp = SymplecticPotential::from_profile(p, g.clone(), Profile::Quadratic { amplitude: 1.0 })
        .unwrap();
    for &idx in g.interior() {
        let d = sp.hessian(idx).unwrap()[(0, 0)] - base.hessian(idx).unwrap()[(0, 0)];
        assert_relative_eq!(d, 1.0, epsilon = 1e-9);
    }
}

#[test]
fn canonical_potentials_are_convex() {
    for name in crate::polytope::PRESETS {
        let sp = canonical(name, 0.0625);
        sp.check_convex().unwrap();
        assert!(sp.min_hessian_eigenvalue().unwrap().0 > 0.0);
    }
}

#[test]
fn scaled_bump_loses_convexity() {
    let (p, g) = setup("interval", 0.0625);
    let sp = SymplecticPotential::from_profile(p, g, Profile::Bump { amplitude: -200.0 }).unwrap();
    assert!(matches!(sp.check_convex(), Err(Error::NotConvex { .. })));
}

#[test]
fn dual_of_canonical_interval_at_zero() {
    let sp = canonical("interval", 0.125);
    let xs = XiSet::from_points(vec![vec![0.0]], vec![0.2]);
    let k = legendre_to_complex(&sp, &xs, &NewtonConfig::default()).unwrap();
    assert_relative_eq!(k.moment[0][0], 0.5, epsilon = 1e-12);
    assert_relative_eq!(k.psi[0], 2f64.ln() / 2.0, epsilon = 1e-12);
}

#[test]
fn fenchel_identity_holds_on_samples() {
    let (p, g) = setup("square", 0.125);
    let sp = SymplecticPotential::from_profile(p, g, Profile::Bump { amplitude: 3.0 }).unwrap();
    let xs = XiSet::from_reference(&canonical("square", 0.125)).unwrap();
    let k = legendre_to_complex(&sp, &xs, &NewtonConfig::default()).unwrap();
    for i in 0..k.len() {
        let u = sp.value(&k.moment[i]).unwrap();
        let pair: f64 = k.xi[i].iter().zip(&k.moment[i]).map(|(a, b)| a * b).sum();
        assert!((k.psi[i] + u - pair).abs() < 1e-12 * (1.0 + pair.abs()));
        assert!(k.residual[i] <= 1e-10);
    }
    assert!(k.supporting_plane_defect() < 1e-10);
}

#[test]
fn identical_potentials_give_zero() {
    let sp = canonical("simplex", 0.125);
    let xs = XiSet::from_reference(&sp).unwrap();
    let rel = relative_potential(&sp, &sp, &xs, &NewtonConfig::default()).unwrap();
    assert!(rel.phi.iter().all(|&v| v == 0.0));
}

#[test]
fn affine_shift_translates_the_dual() {
    let sp0 = canonical("square", 0.125);
    let a = [0.4, -0.25];
    let sp = sp0.plus_affine(&a, 0.0).unwrap();
    let xs = XiSet::from_reference(&sp0).unwrap();
    let cfg = NewtonConfig::default();
    let rel = relative_potential(&sp, &sp0, &xs, &cfg).unwrap();
    let bary = sp0.polytope().barycenter().unwrap();
    for (k, xi) in xs.points().iter().enumerate().step_by(5) {
        let shifted: Vec<f64> = xi.iter().zip(&a).map(|(x, s)| x - s).collect();
        let psi_a = solve_legendre(&sp0, &shifted, &bary, &cfg).unwrap().psi;
        let psi_b = solve_legendre(&sp0, xi, &bary, &cfg).unwrap().psi;
        assert_relative_eq!(rel.phi[k], psi_a - psi_b, epsilon = 1e-9);
    }
}

#[test]
fn normalization() {
    let sp = canonical("interval", 0.0625);
    let nz = sp.normalize_at_point(&[0.5]).unwrap();
    let (v, g, _) = nz.eval(&[0.5]).unwrap();
    assert!(v.abs() < 1e-14 && g[0].abs() < 1e-12);
    for &x in &[0.01, 0.2, 0.49, 0.51, 0.9] {
        assert!(nz.value(&[x]).unwrap() > 0.0);
    }
    let twice = nz.normalize_at_point(&[0.5]).unwrap();
    for (a, b) in twice.smooth().iter().zip(nz.smooth()) {
        assert!((a - b).abs() < 1e-13);
    }
    for &idx in sp.grid().interior() {
        assert_relative_eq!(
            nz.hessian(idx).unwrap(),
            sp.hessian(idx).unwrap(),
            epsilon = 1e-8
        );
    }
}

#[test]
fn round_trip_on_presets() {
    for name in crate::polytope::PRESETS {
        let (p, g) = setup(name, 0.0625);
        let sp = SymplecticPotential::from_profile(p, g, Profile::Bump { amplitude: 1.0 }).unwrap();
        let rt = fenchel_round_trip(&sp, &NewtonConfig::default()).unwrap();
        assert!(rt.max_value_error <= 1e-9, "{name}: {rt:?}");
        assert!(rt.max_point_error <= 1e-8, "{name}: {rt:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constant_shift_gives_constant_phi(c in -2.0f64..2.0) {
        let sp0 = canonical("interval", 0.0625);
        let sp = sp0.plus_affine(&[0.0], -c).unwrap();
        let xs = XiSet::from_reference(&sp0).unwrap();
        let rel = relative_potential(&sp, &sp0, &xs, &NewtonConfig::default()).unwrap();
        for &v in &rel.phi {
            prop_assert!((v - c).abs() <= 2e-10);
        }
    }

    #[test]
    fn dual_is_convex_along_lines(a in -3.0f64..3.0, b in -3.0f64..3.0, t in 0.0f64..1.0) {
        let sp = canonical("square", 0.125);
        let cfg = NewtonConfig::default();
        let start = [0.5, 0.5];
        let pa = solve_legendre(&sp, &[a, b], &start, &cfg).unwrap().psi;
        let pb = solve_legendre(&sp, &[b, -a], &start, &cfg).unwrap().psi;
        let mid = [t * a + (1.0 - t) * b, t * b - (1.0 - t) * a];
        let pm = solve_legendre(&sp, &mid, &start, &cfg).unwrap().psi;
        prop_assert!(pm <= t * pa + (1.0 - t) * pb + 1e-12);
    }
}
