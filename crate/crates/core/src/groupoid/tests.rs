use super::*;
use crate::ether::fixtures::{darboux_pullback, euclid_weyl, sphere_chart};
use crate::geometry::{fd_gradient, point};
use crate::phase_maps::{dynamic_phase, dynamic_phase_function, flow_map, phase_of_map, HamiltonianSystem, SymplecticMap};
use crate::phase_product::{phase_product, product_function};
use crate::testkit::{self, assert_close};
use crate::torsion::make_torsion_fixture;

fn small_phase(e: &EtherStructure, seed: u64) -> PhaseFunction {
    let mut rng = testkit::rng(seed);
    let c = testkit::cube(&mut rng, 10, 0.3);
    let mut coeffs = [0.0; 10];
    coeffs.copy_from_slice(c.as_slice());
    let g = flow_map(&HamiltonianSystem::polynomial(coeffs), &e.fixture, 0.25);
    phase_of_map(e, &g, &point(&[0.0, 0.0]))
}

fn random_element(rng: &mut rand_chacha::ChaCha8Rng, r: f64, pr: f64) -> GroupoidElement {
    GroupoidElement::new(testkit::cube(rng, 2, 0.6 * r), testkit::cube(rng, 2, pr))
}

#[test]
fn fibration_examples() {
    let e = euclid_weyl(1);
    let m = GroupoidElement::new(point(&[0.0, 0.0]), point(&[0.0, 2.0]));
    assert_close(&left_map(&e, &m).unwrap(), &point(&[1.0, 0.0]), 1e-10, "ℓ");
    assert_close(&right_map(&e, &m).unwrap(), &point(&[-1.0, 0.0]), 1e-10, "r");
    for (e, r) in testkit::all() {
        let mut rng = testkit::rng(3);
        let x = testkit::cube(&mut rng, 2, 0.6 * r);
        let u = GroupoidElement::unit(&x);
        assert_close(&left_map(&e, &u).unwrap(), &x, 1e-12, "ℓ(x,0)");
        assert_close(&right_map(&e, &u).unwrap(), &x, 1e-12, "r(x,0)");
        let m = random_element(&mut rng, r, 0.3);
        let (l, rr) = (left_map(&e, &m).unwrap(), right_map(&e, &m).unwrap());
        assert_close(&e.reflection(&m.base, &rr).unwrap(), &l, 1e-7, e.name());
        assert!((e.hamiltonian(&m.base, &l).unwrap() - &m.momentum).amax() < 1e-10);
    }
}

#[test]
fn left_map_first_order() {
    for (e, r) in testkit::all() {
        let mut rng = testkit::rng(4);
        let x = testkit::cube(&mut rng, 2, 0.6 * r);
        let f = |p: &Point| left_map(&e, &GroupoidElement::new(x.clone(), p.clone()));
        let h = 1e-5;
        // inverse of D_zH on the diagonal; ½Ψ when the boundary condition holds
        let first = e.hamiltonian_dz(&x, &x).unwrap().try_inverse().unwrap();
        if e.involutive() {
            assert!((&first - e.fixture.psi(&x) * 0.5).amax() < 1e-6, "{}", e.name());
        }
        for a in 0..2 {
            let mut dp = Point::zeros(2);
            dp[a] = h;
            let col = (f(&dp).unwrap() - f(&-&dp).unwrap()) / (2.0 * h);
            assert_close(&col, &first.column(a).into_owned(), 1e-5, e.name());
        }
    }
}

/// `∂²ℓˡ/∂p_a∂p_b` at `p = 0` by central differences.
fn left_map_hessian(e: &EtherStructure, x: &Point, h: f64) -> Vec<f64> {
    let f = |a: f64, b: f64| left_map(e, &GroupoidElement::new(x.clone(), point(&[a, b]))).unwrap();
    let mut out = vec![0.0; 8];
    for a in 0..2 {
        for b in 0..2 {
            let mut ea = [0.0; 2];
            let mut eb = [0.0; 2];
            ea[a] = h;
            eb[b] = h;
            let pp = f(ea[0] + eb[0], ea[1] + eb[1]);
            let pm = f(ea[0] - eb[0], ea[1] - eb[1]);
            let mp = f(-ea[0] + eb[0], -ea[1] + eb[1]);
            let mm = f(-ea[0] - eb[0], -ea[1] - eb[1]);
            for l in 0..2 {
                out[(l * 2 + a) * 2 + b] = (pp[l] - pm[l] - mp[l] + mm[l]) / (4.0 * h * h);
            }
        }
    }
    out
}

#[test]
fn left_map_second_order() {
    let e = euclid_weyl(1);
    let hess = left_map_hessian(&e, &point(&[0.3, 0.2]), 1e-3);
    assert!(hess.iter().all(|v| v.abs() < 1e-6), "{hess:?}");

    let e = sphere_chart();
    let x = point(&[0.3, -0.2]);
    let hess = left_map_hessian(&e, &x, 1e-3);
    let gamma = e.connection(&x).unwrap();
    let psi = e.fixture.psi(&x);
    let mut worst: f64 = 0.0;
    for l in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                let mut v = 0.0;
                for k in 0..2 {
                    for m in 0..2 {
                        v += gamma.get(l, k, m) * psi[(k, a)] * psi[(m, b)];
                    }
                }
                worst = worst.max((hess[(l * 2 + a) * 2 + b] + 0.25 * v).abs());
            }
        }
    }
    assert!(worst < 1e-3, "second order mismatch {worst:.3e}");
}

#[test]
fn lie_engel_on_all_fixtures() {
    for (e, r) in testkit::all() {
        let mut rng = testkit::rng(6);
        for _ in 0..10 {
            let m = random_element(&mut rng, r, 0.3);
            let res = lie_engel_residual(&e, &m).unwrap();
            assert!(res < 1e-6, "{}: {res:.3e}", e.name());
        }
    }
}

#[test]
fn lie_engel_detects_corrupted_right_map() {
    let e = euclid_weyl(1);
    let m = GroupoidElement::new(point(&[0.2, 0.1]), point(&[0.3, -0.2]));
    let res = lie_engel_residual_of(&e, |m| left_map(&e, m), |m| left_map(&e, m), &m).unwrap();
    assert!(res > 0.1, "{res}");
}

#[test]
fn euclidean_multiplication_closed_form() {
    let e = euclid_weyl(1);
    let psi = e.fixture.psi(&point(&[0.0, 0.0]));
    let omega = e.fixture.omega(&point(&[0.0, 0.0]));
    let (x, p) = (point(&[0.0, 0.0]), point(&[0.0, 2.0]));
    let m2 = GroupoidElement::new(x.clone(), p.clone());
    // any m1 with ℓ(m1) = r(m2)
    let xi = point(&[0.4, -0.6]);
    let y = right_map(&e, &m2).unwrap() - &psi * &xi * 0.5;
    let m1 = GroupoidElement::new(y.clone(), xi.clone());
    let m = groupoid_multiply(&e, &m2, &m1).unwrap();
    let z = (&x + &y) * 0.5 + &psi * (&p - &xi) * 0.25;
    let eta = &omega * (&x - &y) + (&p + &xi) * 0.5;
    assert_close(&m.base, &z, 1e-9, "z");
    assert_close(&m.momentum, &eta, 1e-9, "η");
    let bad = GroupoidElement::new(point(&[5.0, 5.0]), xi);
    assert!(matches!(groupoid_multiply(&e, &m2, &bad), Err(EtherError::Parameter(_))));
}

#[test]
fn groupoid_axioms() {
    for (e, r) in testkit::all() {
        let mut rng = testkit::rng(7);
        let m3 = random_element(&mut rng, r, 0.2);
        // chain composable elements through their end-points
        let r3 = right_map(&e, &m3).unwrap();
        let q = testkit::near(&mut rng, &r3, 0.2);
        let m2 = element_of_pair(&e, &r3, &q).unwrap();
        let w = testkit::near(&mut rng, &q, 0.2);
        let m1 = element_of_pair(&e, &q, &w).unwrap();
        let a = groupoid_multiply(&e, &groupoid_multiply(&e, &m3, &m2).unwrap(), &m1).unwrap();
        let b = groupoid_multiply(&e, &m3, &groupoid_multiply(&e, &m2, &m1).unwrap()).unwrap();
        assert_close(&a.base, &b.base, 1e-7, e.name());
        assert_close(&a.momentum, &b.momentum, 1e-7, e.name());

        let right_unit = GroupoidElement::unit(&r3);
        let left_unit = GroupoidElement::unit(&left_map(&e, &m3).unwrap());
        for u in [groupoid_multiply(&e, &m3, &right_unit).unwrap(), groupoid_multiply(&e, &left_unit, &m3).unwrap()] {
            assert_close(&u.base, &m3.base, 1e-7, "unit");
            assert_close(&u.momentum, &m3.momentum, 1e-7, "unit");
        }

        let inv = groupoid_inverse(&e, &m3).unwrap();
        assert_close(&left_map(&e, &inv).unwrap(), &r3, 1e-7, "ℓ(m⁻¹)");
        let one = groupoid_multiply(&e, &m3, &inv).unwrap();
        assert!(one.momentum.amax() < 1e-7, "{}", e.name());
        assert_close(&one.base, &left_map(&e, &m3).unwrap(), 1e-7, "m∘m⁻¹ base");
    }
}

#[test]
fn lagrangian_products() {
    let e = euclid_weyl(1);
    let phi = PhaseFunction::linear(point(&[0.0, 1.0]), 0.0);
    let x = point(&[0.3, -0.4]);
    let m = lagrangian_product_point(&e, &phi, &phi, &x).unwrap();
    assert_close(&m.base, &x, 1e-9, "base");
    assert_close(&m.momentum, &point(&[0.0, 2.0]), 1e-8, "momentum");

    for (e, r) in testkit::involutive() {
        let phi = small_phase(&e, 8);
        let zero = PhaseFunction::constant(0.0, 2);
        let mut rng = testkit::rng(9);
        let x = testkit::cube(&mut rng, 2, 0.5 * r);
        let m = lagrangian_product_point(&e, &phi, &zero, &x).unwrap();
        assert_close(&m.momentum, &phi.gradient(&x, 1e-5).unwrap(), 1e-8, "zero section unit");
        let neg = phi.affine(-1.0, 0.0);
        let m = lagrangian_product_point(&e, &neg, &phi, &x).unwrap();
        assert!(m.momentum.amax() < 1e-7, "{}: {:?}", e.name(), m.momentum.as_slice());

        let p2 = small_phase(&e, 10);
        let m = lagrangian_product_point(&e, &p2, &phi, &x).unwrap();
        let prod = product_function(&e, &p2, &phi);
        let fd = fd_gradient(&|x: &Point| prod.value(x), &m.base, 1e-4).unwrap();
        assert_close(&m.momentum, &fd, 1e-5, e.name());
    }
}

#[test]
fn constant_hamiltonian_jacobi() {
    let e = euclid_weyl(1);
    let sys = HamiltonianSystem::constant(0.7);
    let phi = TimePhase::new(|_, t| Ok(-0.7 * t));
    let res = hj_residual(&e, &sys, &phi, &point(&[0.2, 0.3]), 0.0).unwrap();
    assert!(res < 1e-12, "{res}");
}

#[test]
fn dynamic_phase_solves_hamilton_jacobi() {
    let osc = HamiltonianSystem::harmonic_oscillator();
    for e in [euclid_weyl(1), darboux_pullback(1, 0.3).unwrap()] {
        let (e1, s1) = (e.clone(), osc.clone());
        let phi = TimePhase::new(move |x, t| dynamic_phase(&e1, &s1, x, t));
        for (x, t) in [(point(&[0.8, 0.0]), 1.0), (point(&[-0.3, 0.5]), -0.7), (point(&[0.1, -0.6]), 0.4)] {
            let res = hj_residual(&e, &osc, &phi, &x, t).unwrap();
            assert!(res < 1e-4, "{} t={t}: {res:.3e}", e.name());
        }
    }
    // closed form -2 tan(t/2) H on the flat chart
    let e = euclid_weyl(1);
    let x = point(&[0.5, -0.4]);
    let v = dynamic_phase(&e, &osc, &x, 0.9).unwrap();
    let exact = -2.0 * (0.45f64).tan() * osc.value(&x).unwrap();
    assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
}

#[test]
fn product_evolution_solves_hamilton_jacobi() {
    let e = euclid_weyl(1);
    let osc = HamiltonianSystem::harmonic_oscillator();
    let phi0 = small_phase(&e, 11);
    let (e1, s1, p1) = (e.clone(), osc.clone(), phi0.clone());
    let phi = TimePhase::new(move |x, t| {
        if t == 0.0 {
            return p1.value(x);
        }
        phase_product(&e1, &dynamic_phase_function(&e1, &s1, t), &p1, x)
    });
    for (x, t) in [(point(&[0.6, 0.2]), 0.8), (point(&[-0.4, -0.5]), -0.6)] {
        let res = hj_residual(&e, &osc, &phi, &x, t).unwrap();
        assert!(res < 1e-4, "t={t}: {res:.3e}");
    }
}

mod chords {
    use super::*;

    fn unit_circle() -> LagrangianCurve {
        LagrangianCurve::circle(point(&[0.0, 0.0]), 1.0)
    }

    const SEGMENT: f64 = 0.614_184_849_304_378_6;

    #[test]
    fn segment_area_oracle() {
        let v = (0.5f64).acos() - 0.5 * (0.75f64).sqrt();
        assert!((v - SEGMENT).abs() < 1e-15);
    }

    #[test]
    fn circle_chord() {
        let e = euclid_weyl(1);
        let lam = unit_circle();
        let x = point(&[0.5, 0.0]);
        let c = chord_find(&e, &lam, &x).unwrap();
        let r = (0.75f64).sqrt();
        assert_close(&c.a, &point(&[0.5, r]), 1e-9, "a");
        assert_close(&c.b, &point(&[0.5, -r]), 1e-9, "b");
        assert_close(&e.midpoint(&c.a, &c.b).unwrap(), &x, 1e-8, "mid-point");
        let v = chord_phase(&e, &lam, &x).unwrap();
        assert!((v - SEGMENT).abs() < 1e-6, "{v}");
        let back = chord_phase_oriented(&e, &lam, &c.reversed()).unwrap();
        assert!((back + v).abs() < 1e-7, "{back}");
    }

    #[test]
    fn on_curve_and_out_of_domain() {
        let e = euclid_weyl(1);
        let lam = unit_circle();
        for s in [0.0, 1.0, 2.5, 4.0] {
            let x = lam.point(s);
            let c = chord_find(&e, &lam, &x).unwrap();
            assert!(c.degenerate);
            assert_eq!(chord_phase(&e, &lam, &x).unwrap(), 0.0);
            assert!(chord_hj_residual(&e, &lam, &x, 1.0).unwrap() < 1e-6);
        }
        let near = point(&[(0.3f64).cos() * (1.0 - 1e-6), (0.3f64).sin() * (1.0 - 1e-6)]);
        assert!(chord_phase(&e, &lam, &near).unwrap().abs() < 1e-8);
        assert!(matches!(chord_find(&e, &lam, &point(&[0.0, 0.0])), Err(EtherError::Ambiguous { .. })));
        assert!(matches!(chord_find(&e, &lam, &point(&[3.0, 0.0])), Err(EtherError::NotInDomain { .. })));
    }

    #[test]
    fn chord_gradient_law() {
        let cases = [
            (euclid_weyl(1), unit_circle(), point(&[0.5, 0.2])),
            (darboux_pullback(1, 0.3).unwrap(), LagrangianCurve::circle(point(&[0.0, 0.0]), 0.8), point(&[0.3, -0.25])),
        ];
        for (e, lam, x) in cases {
            let phi = chord_phase_function(&e, &lam);
            let fd = fd_gradient(&|x: &Point| chord_phase(&e, &lam, x), &x, 1e-4).unwrap();
            assert_close(&fd, &phi.gradient(&x, 1e-5).unwrap(), 1e-5, e.name());
        }
    }

    #[test]
    fn chord_hamilton_jacobi_system() {
        let e = euclid_weyl(1);
        let lam = unit_circle();
        for x in [point(&[0.5, 0.0]), point(&[-0.2, 0.6]), point(&[0.1, -0.3])] {
            let plus = chord_hj_residual(&e, &lam, &x, 1.0).unwrap();
            let minus = chord_hj_residual(&e, &lam, &x, -1.0).unwrap();
            assert!(plus < 1e-6 && minus < 1e-6, "{plus} {minus}");
        }
        assert!(chord_hj_residual(&e, &LagrangianCurve::circle(point(&[1.0, 0.0]), 1.0), &point(&[0.5, 0.0]), 1.0).is_err());
    }

    #[test]
    fn flow_product_matches_generic_product() {
        let e = euclid_weyl(1);
        let lam = unit_circle();
        let osc = HamiltonianSystem::harmonic_oscillator();
        let x = point(&[0.5, 0.1]);
        let z = chord_product(&e, &lam, &osc, &x, 0.0).unwrap();
        assert!((z.value - chord_phase(&e, &lam, &x).unwrap()).abs() < 1e-12);
        // a shifted curve is not invariant under the flow
        let lam = LagrangianCurve::circle(point(&[0.2, 0.0]), 0.9);
        let chord = chord_phase_function(&e, &lam);
        for t in [0.3, -0.2] {
            let v = chord_product(&e, &lam, &osc, &x, t).unwrap().value;
            let g = phase_product_stationary(&e, &dynamic_phase_function(&e, &osc, t), &chord, &x).unwrap();
            assert!((v - g.value).abs() < 1e-5, "t={t}: {v} vs {}", g.value);
        }
        // flow form as a time-dependent phase
        let lam = unit_circle();
        let (e1, l1, s1) = (e.clone(), lam.clone(), osc.clone());
        let phi = TimePhase::new(move |x, t| chord_product(&e1, &l1, &s1, x, t).map(|p| p.value));
        let res = hj_residual(&e, &osc, &phi, &point(&[0.5, 0.0]), 0.3).unwrap();
        assert!(res < 1e-4, "{res:.3e}");
    }

    #[test]
    fn map_product_matches_generic_product() {
        let e = euclid_weyl(1);
        let lam = LagrangianCurve::circle(point(&[0.0, 0.0]), 1.0);
        let g = SymplecticMap::linear_about(
            point(&[0.0, 0.0]),
            crate::geometry::Matrix::from_row_slice(2, 2, &[1.1, 0.0, 0.0, 1.0 / 1.1]),
        )
        .unwrap();
        let s_y = 0.4;
        let yt = lam.point(s_y);
        let y = e.midpoint(&g.apply(&yt).unwrap(), &yt).unwrap();
        let phi = phase_of_map(&e, &g, &y);
        let chord = chord_phase_function(&e, &lam);
        for x in [point(&[0.5, 0.1]), point(&[-0.3, 0.4])] {
            let v = chord_map_product(&e, &lam, &g, s_y, &x).unwrap().value;
            let p = phase_product_stationary(&e, &phi, &chord, &x).unwrap();
            assert!((v - p.value).abs() < 1e-5, "{v} vs {}", p.value);
        }
    }
}

mod extensions {
    use super::*;

    fn rotation_phase(e: &EtherStructure) -> PhaseFunction {
        dynamic_phase_function(e, &HamiltonianSystem::harmonic_oscillator(), 1.0)
    }

    fn cases() -> Vec<(EtherStructure, Extension, Point)> {
        let e = euclid_weyl(1);
        let d = darboux_pullback(1, 0.3).unwrap();
        vec![
            (e.clone(), Extension::Section(rotation_phase(&e)), point(&[0.3, -0.2])),
            (d.clone(), Extension::Section(rotation_phase(&d)), point(&[0.2, 0.1])),
            (e, Extension::Chord(LagrangianCurve::circle(point(&[0.0, 0.0]), 1.0)), point(&[0.5, 0.1])),
            (d, Extension::Chord(LagrangianCurve::circle(point(&[0.0, 0.0]), 0.8)), point(&[0.3, -0.1])),
        ]
    }

    fn base_value(e: &EtherStructure, ext: &Extension, x: &Point) -> f64 {
        match ext {
            Extension::Section(phi) => phi.value(x).unwrap(),
            Extension::Chord(lam) => chord_phase(e, lam, x).unwrap(),
        }
    }

    #[test]
    fn restriction_recovers_the_phase() {
        for (e, ext, x0) in cases() {
            for k in 0..3 {
                let x = &x0 + point(&[0.05 * k as f64, -0.03 * k as f64]);
                let y = ext.restriction_point(&e, &x).unwrap();
                let v = extension_phase(&e, &ext, &x, &y).unwrap();
                let want = base_value(&e, &ext, &x);
                assert!((v - want).abs() < 1e-6, "{}: {v} vs {want}", e.name());
                let dy = fd_gradient(&|y: &Point| extension_phase(&e, &ext, &x, y), &y, 1e-4).unwrap();
                assert!(dy.amax() < 1e-5, "{}: ∂_y = {:?}", e.name(), dy.as_slice());
            }
        }
    }

    #[test]
    fn extension_gradient_laws() {
        for (e, ext, x) in cases() {
            let y0 = ext.restriction_point(&e, &x).unwrap();
            let y = &y0 + point(&[0.06, 0.04]);
            let p = extension_point(&e, &ext, &x, &y, None).unwrap();
            let dx = fd_gradient(&|x: &Point| extension_phase(&e, &ext, x, &y), &x, 1e-4).unwrap();
            let dy = fd_gradient(&|y: &Point| extension_phase(&e, &ext, &x, y), &y, 1e-4).unwrap();
            assert_close(&dx, &e.hamiltonian(&x, &p.b).unwrap(), 1e-5, e.name());
            assert_close(&dy, &-e.hamiltonian(&y, &p.a).unwrap(), 1e-5, e.name());
            if e.name().starts_with("euclid") {
                assert!(p.triangle.midpoint_defect(&e).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn operator_identities() {
        let e = euclid_weyl(1);
        let (a, b) = (0.4, -0.7);
        let p1 = PhaseFunction::linear(point(&[0.0, a]), 0.0);
        let p2 = PhaseFunction::linear(point(&[0.0, b]), 0.0);
        let x = point(&[0.2, 0.3]);
        let m = lagrangian_product_point(&e, &p1, &p2, &x).unwrap();
        assert_close(&m.momentum, &point(&[0.0, a + b]), 1e-8, "translations");
        let rep = operator_calculus_check(&e, &p1, &p2, &x, &point(&[0.5, -0.1])).unwrap();
        assert!(rep.max() < 1e-7, "{rep:?}");

        let zero = PhaseFunction::constant(0.0, 2);
        let m = lagrangian_product_point(&e, &p1, &zero, &x).unwrap();
        assert_close(&m.momentum, &point(&[0.0, a]), 1e-8, "unit");

        for (e, r) in testkit::involutive() {
            let p1 = small_phase(&e, 12);
            let p2 = small_phase(&e, 13);
            let mut rng = testkit::rng(14);
            let x = testkit::cube(&mut rng, 2, 0.5 * r);
            let q = testkit::near(&mut rng, &x, 0.2);
            let rep = operator_calculus_check(&e, &p1, &p2, &x, &q).unwrap();
            assert_eq!(rep.entries.len(), 6);
            assert!(rep.max() < 1e-5, "{}: {rep:?}", e.name());
        }
        assert!(operator_calculus_check(&make_torsion_fixture(1.0).unwrap(), &p1, &p2, &x, &x).is_err());
    }
}
