use super::*;
use crate::ether::fixtures::{darboux_pullback, euclid_weyl};
use crate::geometry::{fd_gradient, point};
use crate::phase_maps::{dynamic_phase_function, flow_map, normalized_phase, phase_of_map, HamiltonianSystem};
use crate::testkit::{self, assert_close};

fn small_poly(seed: u64, scale: f64) -> HamiltonianSystem {
    let mut rng = testkit::rng(seed);
    let c = testkit::cube(&mut rng, 10, scale);
    let mut coeffs = [0.0; 10];
    coeffs.copy_from_slice(c.as_slice());
    HamiltonianSystem::polynomial(coeffs)
}

fn small_phase(e: &EtherStructure, seed: u64, base: &Point) -> PhaseFunction {
    phase_of_map(e, &flow_map(&small_poly(seed, 0.3), &e.fixture, 0.25), base)
}

fn translation_map(e: &EtherStructure, y: &Point, z: &Point) -> SymplecticMap {
    let (e, y, z) = (e.clone(), y.clone(), z.clone());
    SymplecticMap::new("g_yz", move |w: &Point| e.reflection(&y, &e.reflection(&z, w)?))
}

#[test]
fn triangle_vertex_examples() {
    let e = euclid_weyl(1);
    let x = point(&[0.3, -0.2]);
    let (a, b, c) = triangle_vertices(&e, &x, &x, &x).unwrap();
    for v in [&a, &b, &c] {
        assert_close(v, &x, 1e-12, "degenerate");
    }
    let (y, z) = (point(&[1.0, 0.5]), point(&[-0.4, 0.9]));
    let (a, b, c) = triangle_vertices(&e, &x, &y, &z).unwrap();
    assert_close(&a, &(&x - &y + &z), 1e-10, "A");
    assert_close(&b, &(-&x + &y + &z), 1e-10, "B");
    assert_close(&c, &(&x + &y - &z), 1e-10, "C");
    for (e, r) in testkit::all() {
        let mut rng = testkit::rng(5);
        let x = testkit::cube(&mut rng, 2, 0.5 * r);
        let y = testkit::near(&mut rng, &x, 0.2);
        let z = testkit::near(&mut rng, &x, 0.2);
        let t = triangle(&e, &x, &y, &z).unwrap();
        let [a, _, c] = &t.vertices;
        assert_close(&e.reflection(&x, a).unwrap(), c, 1e-8, e.name());
        if e.involutive() {
            assert!(t.midpoint_defect(&e).unwrap() < 1e-7, "{}", e.name());
        }
    }
}

#[test]
fn euclidean_triangle_area() {
    let e = euclid_weyl(1);
    let v = triangle_phase(&e, &point(&[0.0, 0.0]), &point(&[1.0, 0.0]), &point(&[0.0, 1.0])).unwrap();
    assert!((v + 2.0).abs() < 1e-8, "{v}");
    let x = point(&[0.2, 0.1]);
    let z = point(&[-0.3, 0.4]);
    assert!(triangle_phase(&e, &x, &x, &z).unwrap().abs() < 1e-12);
}

#[test]
fn triangle_equals_translation_phase() {
    for (e, r) in testkit::involutive() {
        let mut rng = testkit::rng(31);
        let x = testkit::cube(&mut rng, 2, 0.5 * r);
        let y = testkit::near(&mut rng, &x, 0.25);
        let z = testkit::near(&mut rng, &x, 0.25);
        let tri = triangle_phase(&e, &x, &y, &z).unwrap();
        let np = normalized_phase(&e, &translation_map(&e, &y, &z), &x, &y).unwrap();
        assert!((tri - np).abs() < 1e-6, "{}: {tri} vs {np}", e.name());
    }
}

#[test]
fn unit_and_translations() {
    let e = euclid_weyl(1);
    let phi = PhaseFunction::linear(point(&[0.0, 1.0]), 0.0);
    let zero = PhaseFunction::constant(0.0, 2);
    let x = point(&[0.4, -0.3]);
    let v = phase_product(&e, &phi, &zero, &x).unwrap();
    assert!((v - phi.value(&x).unwrap()).abs() < 1e-9, "{v}");
    let v = phase_product(&e, &zero, &phi, &x).unwrap();
    assert!((v - phi.value(&x).unwrap()).abs() < 1e-9, "{v}");
    // two unit q-translations make the translation by (2, 0), phase 2p + c
    let y = point(&[0.0, 0.0]);
    let c = phase_product(&e, &phi, &phi, &y).unwrap();
    let both = SymplecticMap::translation(point(&[2.0, 0.0]));
    for x in [point(&[0.4, -0.3]), point(&[-1.0, 0.8]), point(&[0.0, 2.0])] {
        let v = phase_product(&e, &phi, &phi, &x).unwrap();
        assert!((v - c - 2.0 * x[1]).abs() < 1e-9, "{v}");
        let n = normalized_phase(&e, &both, &x, &y).unwrap();
        assert!((v - c - n).abs() < 1e-9, "{v} vs {n}");
    }
}

#[test]
fn gradient_law_and_composition() {
    for (e, r) in testkit::involutive() {
        let base = point(&[0.0, 0.0]);
        let p1 = small_phase(&e, 41, &base);
        let p2 = small_phase(&e, 42, &base);
        let prod = product_function(&e, &p2, &p1);
        let mut rng = testkit::rng(43);
        let x = testkit::cube(&mut rng, 2, 0.5 * r);
        let fd = fd_gradient(&|x: &Point| prod.value(x), &x, 1e-4).unwrap();
        let p = phase_product_point(&e, &p2, &p1, &x).unwrap();
        let law = e.hamiltonian(&x, &p.triangle.vertices[2]).unwrap();
        assert_close(&fd, &law, 1e-5, e.name());
        let g = SymplecticMap::compose(&generated_map(&e, &p2), &generated_map(&e, &p1));
        assert_close(&fd, &phase_gradient(&e, &g, &x).unwrap(), 1e-5, e.name());
    }
}

#[test]
fn stationary_route_agrees() {
    for (e, r) in testkit::involutive() {
        let base = point(&[0.1, 0.0]);
        let p1 = small_phase(&e, 51, &base);
        let p2 = small_phase(&e, 52, &base);
        let mut rng = testkit::rng(53);
        let x = testkit::cube(&mut rng, 2, 0.5 * r);
        let a = phase_product_point(&e, &p2, &p1, &x).unwrap();
        let b = phase_product_stationary(&e, &p2, &p1, &x).unwrap();
        assert!((a.value - b.value).abs() < 1e-7, "{}: {} vs {}", e.name(), a.value, b.value);
        assert_close(&a.x1, &b.x1, 1e-7, "x'");
        assert_close(&a.x2, &b.x2, 1e-7, "x''");
    }
}

#[test]
fn associativity() {
    for (e, r) in testkit::involutive() {
        let base = point(&[0.0, 0.1]);
        let p1 = small_phase(&e, 61, &base);
        let p2 = small_phase(&e, 62, &base);
        let p3 = small_phase(&e, 63, &base);
        let left = product_function(&e, &product_function(&e, &p3, &p2), &p1);
        let right = product_function(&e, &p3, &product_function(&e, &p2, &p1));
        let mut rng = testkit::rng(64);
        for _ in 0..2 {
            let x = testkit::cube(&mut rng, 2, 0.5 * r);
            let (a, b) = (left.value(&x).unwrap(), right.value(&x).unwrap());
            assert!((a - b).abs() < 1e-5, "{}: {a} vs {b}", e.name());
        }
    }
}

#[test]
fn normalized_composition_identity() {
    for (e, r) in testkit::involutive() {
        let g1 = flow_map(&small_poly(71, 0.3), &e.fixture, 0.25);
        let g2 = flow_map(&small_poly(72, 0.3), &e.fixture, 0.25);
        let g = SymplecticMap::compose(&g2, &g1);
        let mut rng = testkit::rng(73);
        let y = testkit::cube(&mut rng, 2, 0.4 * r);
        let yt = fixed_midpoint(&e, &g, &y).unwrap();
        let g1y = g1.apply(&yt).unwrap();
        let y1 = e.midpoint(&g1y, &yt).unwrap();
        let y2 = e.midpoint(&g.apply(&yt).unwrap(), &g1y).unwrap();
        let lhs_fn = product_function(&e, &phase_of_map(&e, &g2, &y2), &phase_of_map(&e, &g1, &y1));
        let tri = triangle_phase(&e, &y, &y2, &y1).unwrap();
        for _ in 0..2 {
            let x = testkit::near(&mut rng, &y, 0.3);
            let lhs = lhs_fn.value(&x).unwrap();
            let rhs = normalized_phase(&e, &g, &x, &y).unwrap() + tri;
            assert!((lhs - rhs).abs() < 1e-5, "{}: {lhs} vs {rhs}", e.name());
        }
    }
}

#[test]
fn one_parameter_group() {
    let osc = HamiltonianSystem::harmonic_oscillator();
    let cases = [(euclid_weyl(1), osc.clone()), (darboux_pullback(1, 0.3).unwrap(), small_poly(81, 0.5))];
    for (e, sys) in cases {
        let mut rng = testkit::rng(82);
        for (t, tau) in [(0.5, -0.3), (-0.4, -0.5), (0.2, 0.45)] {
            let x = testkit::cube(&mut rng, 2, 0.6);
            let sum = dynamic_phase_function(&e, &sys, t + tau).value(&x).unwrap();
            let prod =
                phase_product(&e, &dynamic_phase_function(&e, &sys, tau), &dynamic_phase_function(&e, &sys, t), &x).unwrap();
            assert!((sum - prod).abs() < 1e-5, "{} t={t} τ={tau}: {sum} vs {prod}", e.name());
        }
    }
}
