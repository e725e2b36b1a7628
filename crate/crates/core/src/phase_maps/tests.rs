use super::*;
use crate::ether::fixtures::{darboux_pullback, euclid_weyl, sphere_chart};
use crate::geometry::point;
use crate::testkit::{self, assert_close};
use crate::torsion::make_torsion_fixture;
use std::f64::consts::PI;

fn small_flow(e: &EtherStructure, seed: u64) -> SymplecticMap {
    let mut rng = testkit::rng(seed);
    let c = testkit::cube(&mut rng, 10, 0.3);
    let mut coeffs = [0.0; 10];
    coeffs.copy_from_slice(c.as_slice());
    flow_map(&HamiltonianSystem::polynomial(coeffs), &e.fixture, 0.3)
}

#[test]
fn oscillator_flow_rotates_counter_clockwise() {
    let fix = SymplecticFixture::standard(1, 5.0);
    let sys = HamiltonianSystem::harmonic_oscillator();
    let z = point(&[1.0, 0.0]);
    assert_eq!(flow(&sys, &fix, &z, 0.0).unwrap(), z);
    let w = flow(&sys, &fix, &z, PI / 2.0).unwrap();
    assert_close(&w, &point(&[0.0, 1.0]), 1e-9, "quarter turn");
    assert!((w.norm() - 1.0).abs() < 1e-8);
    let a = flow(&sys, &fix, &flow(&sys, &fix, &z, 0.4).unwrap(), 0.7).unwrap();
    assert_close(&a, &flow(&sys, &fix, &z, 1.1).unwrap(), 1e-7, "group law");
}

#[test]
fn energy_is_conserved() {
    let e = darboux_pullback(1, 0.3).unwrap();
    let sys = HamiltonianSystem::polynomial([0.0, 0.1, 0.0, 0.5, 0.1, 0.5, 0.05, 0.0, 0.02, 0.0]);
    let z = point(&[0.4, -0.3]);
    let w = flow(&sys, &e.fixture, &z, 1.0).unwrap();
    assert!((sys.value(&w).unwrap() - sys.value(&z).unwrap()).abs() < 1e-7);
}

#[test]
fn fixed_midpoint_examples() {
    let e = euclid_weyl(1);
    let x = point(&[0.3, 0.4]);
    assert_close(&fixed_midpoint(&e, &SymplecticMap::identity(2), &x).unwrap(), &x, 1e-12, "identity");
    let a = point(&[1.0, 0.0]);
    let xt = fixed_midpoint(&e, &SymplecticMap::translation(a.clone()), &x).unwrap();
    assert_close(&xt, &(&x - &a * 0.5), 1e-10, "translation");
    for (e, r) in testkit::all() {
        let g = small_flow(&e, 11);
        let mut rng = testkit::rng(12);
        let x = testkit::cube(&mut rng, 2, r * 0.8);
        let xt = fixed_midpoint(&e, &g, &x).unwrap();
        assert_close(&e.reflection(&x, &xt).unwrap(), &g.apply(&xt).unwrap(), 1e-8, e.name());
    }
}

#[test]
fn far_map_is_reported() {
    let e = euclid_weyl(1);
    // s_x∘(-id) has no isolated fixed point
    let g = SymplecticMap::new("minus", |z: &Point| Ok(-z));
    let err = fixed_midpoint(&e, &g, &point(&[0.2, 0.1])).unwrap_err();
    assert!(matches!(err, EtherError::NotInDomain { .. } | EtherError::Singular { .. }));
}

#[test]
fn translation_phase() {
    let e = euclid_weyl(1);
    let g = SymplecticMap::translation(point(&[1.0, 0.0]));
    let x = point(&[0.2, -0.7]);
    assert_close(&phase_gradient(&e, &g, &x).unwrap(), &point(&[0.0, 1.0]), 1e-10, "gradient");
    let v = normalized_phase(&e, &g, &point(&[0.0, 2.0]), &point(&[0.0, 0.0])).unwrap();
    assert!((v - 2.0).abs() < 1e-10, "{v}");
    assert_eq!(normalized_phase(&e, &g, &x, &x).unwrap(), 0.0);
    assert!(phase_gradient(&e, &SymplecticMap::identity(2), &x).unwrap().amax() < 1e-12);
}

#[test]
fn normalized_phase_matches_integrated_gradient_and_is_closed() {
    for (e, r) in testkit::all() {
        let g = small_flow(&e, 21);
        let mut rng = testkit::rng(22);
        let y = testkit::cube(&mut rng, 2, r * 0.6);
        let x = testkit::near(&mut rng, &y, 0.3);
        let direct = normalized_phase(&e, &g, &x, &y).unwrap();
        let path = integrate_gradient(&e.fixture, |w| phase_gradient(&e, &g, w), &y, &x).unwrap();
        assert!((direct - path).abs() < 1e-6, "{}: {direct} vs {path}", e.name());
        let curl = fd_curl(|w| phase_gradient(&e, &g, w), &x, 1e-4).unwrap();
        assert!(curl < 1e-5, "{}: curl {curl:.3e}", e.name());
    }
}

#[test]
fn cocycle_laws() {
    for (e, r) in testkit::involutive() {
        let g = small_flow(&e, 31);
        let gi = g.inverse();
        let mut rng = testkit::rng(32);
        let x = testkit::cube(&mut rng, 2, r * 0.6);
        let y = testkit::near(&mut rng, &x, 0.3);
        let w = testkit::near(&mut rng, &x, 0.3);
        let f = |a: &Point, b: &Point| normalized_phase(&e, &g, a, b).unwrap();
        assert!((f(&y, &x) + f(&x, &y)).abs() < 1e-6);
        assert!((f(&x, &y) + f(&y, &w) + f(&w, &x)).abs() < 1e-6, "{}", e.name());
        let inv = normalized_phase(&e, &gi, &x, &y).unwrap();
        assert!((inv + f(&x, &y)).abs() < 1e-6, "{}: {inv} vs {}", e.name(), f(&x, &y));
    }
}

#[test]
fn curve_independence() {
    let e = sphere_chart();
    let g = small_flow(&e, 41);
    let (x, y) = (point(&[0.2, 0.1]), point(&[-0.1, 0.3]));
    let xt = fixed_midpoint(&e, &g, &x).unwrap();
    let yt = fixed_midpoint(&e, &g, &y).unwrap();
    let (a, b) = (xt.clone(), yt.clone());
    let bump = Curve::new("bump", move |t| {
        let d = &b - &a;
        let n = point(&[-d[1], d[0]]);
        Ok(&a + &d * t + n * (0.3 * (PI * t).sin()))
    });
    let straight = normalized_phase(&e, &g, &x, &y).unwrap();
    let bent = normalized_phase_along(&e, &g, &x, &y, Some(bump)).unwrap();
    assert!((straight - bent).abs() < 1e-7, "{straight} vs {bent}");
}

#[test]
fn map_from_phase_examples() {
    let e = euclid_weyl(1);
    let z = point(&[0.4, -0.1]);
    assert_close(&map_from_phase(&e, &PhaseFunction::constant(3.0, 2), &z).unwrap(), &z, 1e-12, "const");
    let p = PhaseFunction::linear(point(&[0.0, 1.0]), 0.0);
    assert_close(&map_from_phase(&e, &p, &z).unwrap(), &(&z + point(&[1.0, 0.0])), 1e-10, "Φ = p");
}

#[test]
fn phase_map_round_trip() {
    for (e, r) in testkit::all() {
        let g = small_flow(&e, 51);
        let y = point(&[0.0, 0.0]);
        let phi = PhaseFunction::new("fd-only", {
            let (e, g, y) = (e.clone(), g.clone(), y.clone());
            move |x| normalized_phase(&e, &g, x, &y)
        })
        .with_gradient({
            let (e, g) = (e.clone(), g.clone());
            move |x| phase_gradient(&e, &g, x)
        });
        let mut rng = testkit::rng(52);
        for _ in 0..2 {
            let z = testkit::cube(&mut rng, 2, r * 0.6);
            let back = map_from_phase(&e, &phi, &z).unwrap();
            assert_close(&back, &g.apply(&z).unwrap(), 1e-6, e.name());
        }
    }
}

#[test]
fn membrane_representation_reproduces_phase() {
    let e = euclid_weyl(1);
    let p = PhaseFunction::linear(point(&[0.0, 1.0]), 0.0);
    let (x, y) = (point(&[0.3, 0.9]), point(&[-0.5, 0.1]));
    assert!((membrane_representation(&e, &p, &x, &y).unwrap() - p.value(&x).unwrap()).abs() < 1e-8);
    let c = PhaseFunction::constant(1.5, 2);
    assert!((membrane_representation(&e, &c, &x, &y).unwrap() - 1.5).abs() < 1e-12);
    let s = sphere_chart();
    let phi = PhaseFunction::linear(point(&[0.05, 0.0]), 0.0);
    let (x, y) = (point(&[0.2, -0.1]), point(&[-0.1, 0.2]));
    let v = membrane_representation(&s, &phi, &x, &y).unwrap();
    assert!((v - phi.value(&x).unwrap()).abs() < 1e-5, "{v}");
}

#[test]
fn oscillator_dynamic_phase() {
    let e = euclid_weyl(1);
    let sys = HamiltonianSystem::harmonic_oscillator();
    let x = point(&[1.0, 0.0]);
    assert_eq!(dynamic_phase(&e, &sys, &x, 0.0).unwrap(), 0.0);
    let v = dynamic_phase(&e, &sys, &x, PI / 2.0).unwrap();
    assert!((v + 1.0).abs() < 1e-6, "{v}");
    let g = flow_map(&sys, &e.fixture, PI / 2.0);
    let o = point(&[0.0, 0.0]);
    let path = integrate_gradient(&e.fixture, |w| phase_gradient(&e, &g, w), &o, &x).unwrap();
    assert!((path - v).abs() < 1e-6);
}

#[test]
fn dynamic_phase_normalization_identity() {
    for (e, r) in testkit::all() {
        let sys = HamiltonianSystem::harmonic_oscillator();
        let mut rng = testkit::rng(61);
        let x = testkit::cube(&mut rng, 2, r * 0.5);
        let y = testkit::near(&mut rng, &x, 0.3);
        let t = 0.35;
        let g = flow_map(&sys, &e.fixture, t);
        let lhs = normalized_phase(&e, &g, &x, &y).unwrap();
        let rhs = dynamic_phase(&e, &sys, &x, t).unwrap() - dynamic_phase(&e, &sys, &y, t).unwrap();
        assert!((lhs - rhs).abs() < 1e-6, "{}: {lhs} vs {rhs}", e.name());
    }
}

#[test]
fn poincare_cartan() {
    for (e, _) in testkit::all() {
        let sys = HamiltonianSystem::polynomial([0.0, 0.2, -0.1, 0.5, 0.0, 0.5, 0.1, 0.0, 0.0, 0.05]);
        let (z, w) = (point(&[0.3, 0.1]), point(&[-0.2, 0.4]));
        let t = 0.6;
        let area = poincare_cartan_area(&e, &sys, &z, &w, t).unwrap();
        let expect = t * (sys.value(&z).unwrap() - sys.value(&w).unwrap());
        assert!((area - expect).abs() < 1e-6, "{}: {area} vs {expect}", e.name());
    }
}

#[test]
fn torsion_translation_phase_matches_gradient_path() {
    let e = make_torsion_fixture(1.0).unwrap();
    let g = SymplecticMap::translation(point(&[0.1, 0.0]));
    let (x, y) = (point(&[0.4, -0.2]), point(&[-0.3, 0.5]));
    let direct = normalized_phase(&e, &g, &x, &y).unwrap();
    let path = integrate_gradient(&e.fixture, |w| phase_gradient(&e, &g, w), &y, &x).unwrap();
    assert!((direct - path).abs() < 1e-5, "{direct} vs {path}");
}

#[test]
fn hessian_at_fixed_point() {
    let e = euclid_weyl(1);
    let sys = HamiltonianSystem::polynomial([0.0, 0.0, 0.0, 0.6, 0.2, 0.4, 0.0, 0.0, 0.0, 0.0]);
    let g = flow_map(&sys, &e.fixture, 0.5);
    let o = point(&[0.0, 0.0]);
    assert!(phase_gradient(&e, &g, &o).unwrap().amax() < 1e-10);
    let hess = fd_jacobian(&|w: &Point| phase_gradient(&e, &g, w), &o, 1e-5).unwrap();
    let dg = g.jacobian(&o, 1e-6).unwrap();
    let id = Matrix::identity(2, 2);
    let expect = e.fixture.omega(&o) * 2.0 * (&dg - &id) * (&dg + &id).try_inverse().unwrap();
    assert!((&hess - &expect).amax() < 1e-4, "{hess} vs {expect}");
}
