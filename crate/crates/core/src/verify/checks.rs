//! The identity catalogue.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Runner;
use crate::error::{EtherError, Result};
use crate::ether::fixtures::euclid_weyl;
use crate::ether::{ether_from_reflections, symplectic_connection_residual, symplectic_defect, EtherStructure, ReflectionFamily};
use crate::geometry::{fd_gradient, fd_jacobian, point, Matrix, Point};
use crate::groupoid::{
    chord_find, chord_hj_residual, chord_phase, chord_phase_function, chord_phase_oriented, chord_product, element_of_pair,
    extension_phase, extension_point, groupoid_inverse, groupoid_multiply, hj_residual, lagrangian_product_point, left_map,
    lie_engel_residual, operator_calculus_check, right_map, Extension, GroupoidElement, LagrangianCurve, TimePhase,
};
use crate::phase_maps::{
    dynamic_phase, dynamic_phase_function, fixed_midpoint, flow_map, generated_map, integrate_gradient, map_from_phase,
    normalized_phase, phase_gradient, phase_of_map, poincare_cartan_area, HamiltonianSystem, PhaseFunction, SymplecticMap,
};
use crate::phase_product::{phase_product, phase_product_stationary, product_function, triangle_phase};
use crate::torsion::{involution_defect, make_torsion_fixture, torsion_phase_suite};

/// Radius of the cube of sampled base points.
fn radius(e: &EtherStructure) -> f64 {
    match e.name() {
        n if n.starts_with("euclid") || n.starts_with("torsion") => 1.0,
        n if n.starts_with("darboux") => 0.8,
        n if n.starts_with("sphere") => 0.6,
        _ => 0.5,
    }
}

fn is_sphere(e: &EtherStructure) -> bool {
    e.name().starts_with("sphere")
}

fn cube(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Point {
    Point::from_fn(dim, |_, _| rng.gen_range(-r..r))
}

fn near(rng: &mut ChaCha8Rng, c: &Point, r: f64) -> Point {
    c.map(|v| v + rng.gen_range(-r..r))
}

fn small_system(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> HamiltonianSystem {
    if dim == 2 {
        let mut c = [0.0; 10];
        for v in c.iter_mut() {
            *v = rng.gen_range(-scale..scale);
        }
        HamiltonianSystem::polynomial(c)
    } else {
        let s = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-scale..scale));
        HamiltonianSystem::quadratic(s, cube(rng, dim, scale))
    }
}

fn small_map(e: &EtherStructure, rng: &mut ChaCha8Rng) -> SymplecticMap {
    flow_map(&small_system(rng, e.dim(), 0.3), &e.fixture, 0.25)
}

fn small_phase(e: &EtherStructure, rng: &mut ChaCha8Rng) -> PhaseFunction {
    let g = small_map(e, rng);
    phase_of_map(e, &g, &Point::zeros(e.dim()))
}

fn dist(a: &Point, b: &Point) -> f64 {
    (a - b).amax()
}

fn element(e: &EtherStructure, rng: &mut ChaCha8Rng, pr: f64) -> GroupoidElement {
    let r = radius(e);
    GroupoidElement::new(cube(rng, e.dim(), 0.6 * r), cube(rng, e.dim(), pr))
}

pub(super) fn all(run: &mut Runner) {
    structure(run);
    groupoid(run);
    if run.e.involutive() {
        phases(run);
        products(run);
        if run.e.dim() == 2 {
            chords(run);
            extensions(run);
        }
        hamilton_jacobi(run);
    } else {
        torsion(run);
    }
}

fn structure(run: &mut Runner) {
    let e = run.e.clone();
    let (n, heavy) = (run.cfg.samples, run.cfg.heavy_samples);
    let (r, d) = (radius(&e), e.dim());
    let sphere = is_sphere(&e);
    let inv = e.involutive();
    let pair = |rng: &mut ChaCha8Rng| {
        let x = cube(rng, d, r);
        let z = near(rng, &x, 0.4 * r);
        (x, z)
    };

    run.check("reflection-integrated", n, if sphere { 1e-6 } else { 1e-7 }, |rng| {
        let (x, z) = pair(rng);
        Ok(dist(&e.integrate_reflection(&x, &z, None)?, &e.reflection(&x, &z)?))
    });
    let (e1, e2) = (e.clone(), e.clone());
    let family = ReflectionFamily {
        reflect: Arc::new(move |x: &Point, z: &Point| e1.reflection(x, z)),
        inverse: None,
        dx: Some(Arc::new(move |x: &Point, z: &Point| e2.reflection_dx(x, z))),
    };
    if inv {
        run.check("hamiltonian-from-reflections", n, 1e-6, |rng| {
            let (x, z) = pair(rng);
            Ok(dist(&ether_from_reflections(&e.fixture, &family, &x, &z)?, &e.hamiltonian(&x, &z)?))
        });
    }
    run.check("zero-curvature", n, if sphere { 1e-4 } else { 1e-6 }, |rng| {
        let (x, z) = pair(rng);
        e.zero_curvature_residual(&x, &z)
    });
    run.check("boundary-fixed-point", n, 1e-10, |rng| {
        let x = cube(rng, d, r);
        Ok(e.hamiltonian(&x, &x)?.amax())
    });
    let first = run.check("boundary-first-order", n, 1e-6, |rng| {
        let x = cube(rng, d, r);
        let dz = fd_jacobian(&|w: &Point| e.hamiltonian(&x, w), &x, e.fixture.settings.h_fd)?;
        Ok((dz - e.fixture.omega(&x) * 2.0).amax())
    });
    if !inv {
        first.expect_fail();
    }
    let skew = run.check("skew", n, if sphere { 1e-6 } else { 1e-8 }, |rng| {
        let (x, z) = pair(rng);
        Ok((e.hamiltonian(&x, &e.reflection(&x, &z)?)? + e.hamiltonian(&x, &z)?).amax())
    });
    if !inv {
        skew.expect_fail();
    }
    let invo = run.check("involution", n, 1e-8, |rng| {
        let (x, z) = pair(rng);
        involution_defect(&e, &x, &z)
    });
    if !inv {
        invo.expect_fail();
    }
    run.check("reflection-symplectic", n, 1e-6, |rng| {
        let (x, z) = pair(rng);
        symplectic_defect(&e.fixture, |w| e.reflection(&x, w), &z)
    });
    run.check("translation-symplectic", n, 1e-6, |rng| {
        let (x, z) = pair(rng);
        let y = near(rng, &x, 0.2 * r);
        symplectic_defect(&e.fixture, |w| e.translation(&x, &y, w), &z)
    });
    run.check("connection-symplectic", heavy, if sphere { 1e-4 } else { 1e-5 }, |rng| {
        let x = cube(rng, d, r);
        symplectic_connection_residual(&e.fixture, &e.connection(&x)?, &x)
    });
}

fn phases(run: &mut Runner) {
    let e = run.e.clone();
    let heavy = run.cfg.heavy_samples;
    let (r, d) = (radius(&e), e.dim());
    let osc = HamiltonianSystem::harmonic_oscillator();

    run.check("phase-round-trip", heavy.div_ceil(2), 1e-6, |rng| {
        let g = small_map(&e, rng);
        let phi = PhaseFunction::new("Φ", |_| Ok(0.0)).with_gradient({
            let (e, g) = (e.clone(), g.clone());
            move |x| phase_gradient(&e, &g, x)
        });
        let z = cube(rng, d, 0.6 * r);
        Ok(dist(&map_from_phase(&e, &phi, &z)?, &g.apply(&z)?))
    });
    run.check("cocycle", heavy, 1e-6, |rng| {
        let g = small_map(&e, rng);
        let x = cube(rng, d, 0.6 * r);
        let y = near(rng, &x, 0.3);
        let w = near(rng, &x, 0.3);
        let f = |a: &Point, b: &Point| normalized_phase(&e, &g, a, b);
        let anti = (f(&y, &x)? + f(&x, &y)?).abs();
        let cyc = (f(&x, &y)? + f(&y, &w)? + f(&w, &x)?).abs();
        let inverse = (normalized_phase(&e, &g.inverse(), &x, &y)? + f(&x, &y)?).abs();
        Ok(anti.max(cyc).max(inverse))
    });
    if e.name().starts_with("euclid") && d == 2 {
        run.check("oscillator-quarter-turn", 1, 1e-4, |_| {
            Ok((dynamic_phase(&e, &osc, &point(&[1.0, 0.0]), PI / 2.0)?.abs() - 1.0).abs())
        });
    }
    run.check("dynamic-gradient-path", heavy, 1e-6, |rng| {
        let t = rng.gen_range(0.2..1.0);
        let x = cube(rng, d, 0.6 * r);
        let y = near(rng, &x, 0.3);
        let phi = dynamic_phase_function(&e, &osc, t);
        let path = integrate_gradient(&e.fixture, |w: &Point| phi.gradient(w, 1e-5), &y, &x)?;
        Ok((phi.value(&x)? - phi.value(&y)? - path).abs())
    });
    run.check("dynamic-normalization", heavy, 1e-6, |rng| {
        let sys = small_system(rng, d, 0.5 * r);
        let t = rng.gen_range(-0.5..0.5);
        let x = cube(rng, d, 0.5 * r);
        let y = near(rng, &x, 0.3);
        let g = flow_map(&sys, &e.fixture, t);
        Ok((normalized_phase(&e, &g, &x, &y)? - dynamic_phase(&e, &sys, &x, t)? + dynamic_phase(&e, &sys, &y, t)?).abs())
    });
    run.check("poincare-cartan", heavy, 1e-6, |rng| {
        let sys = small_system(rng, d, 0.5 * r);
        let t = rng.gen_range(-0.8..0.8);
        let z = cube(rng, d, 0.5 * r);
        let w = near(rng, &z, 0.4);
        Ok((poincare_cartan_area(&e, &sys, &z, &w, t)? - t * (sys.value(&z)? - sys.value(&w)?)).abs())
    });
}

fn products(run: &mut Runner) {
    let e = run.e.clone();
    let heavy = run.cfg.heavy_samples;
    let (r, d) = (radius(&e), e.dim());

    if e.name().starts_with("euclid") && d == 2 {
        run.check("triangle-area", 1, 1e-8, |_| {
            let v = triangle_phase(&e, &point(&[0.0, 0.0]), &point(&[1.0, 0.0]), &point(&[0.0, 1.0]))?;
            Ok((v.abs() - 2.0).abs())
        });
    }
    run.check("triangle-translation", heavy, 1e-6, |rng| {
        let x = cube(rng, d, 0.5 * r);
        let y = near(rng, &x, 0.25 * r);
        let z = near(rng, &x, 0.25 * r);
        let (ee, yy, zz) = (e.clone(), y.clone(), z.clone());
        let g = SymplecticMap::new("g_yz", move |w: &Point| ee.reflection(&yy, &ee.reflection(&zz, w)?));
        Ok((triangle_phase(&e, &x, &y, &z)? - normalized_phase(&e, &g, &x, &y)?).abs())
    });
    run.check("product-unit", heavy, 1e-8, |rng| {
        let phi = small_phase(&e, rng);
        let zero = PhaseFunction::constant(0.0, d);
        let x = cube(rng, d, 0.5 * r);
        let v = phi.value(&x)?;
        Ok((phase_product(&e, &phi, &zero, &x)? - v).abs().max((phase_product(&e, &zero, &phi, &x)? - v).abs()))
    });
    run.check("product-associativity", heavy.div_ceil(4), 1e-5, |rng| {
        let (p1, p2, p3) = (small_phase(&e, rng), small_phase(&e, rng), small_phase(&e, rng));
        let x = cube(rng, d, 0.5 * r);
        let a = product_function(&e, &product_function(&e, &p3, &p2), &p1).value(&x)?;
        let b = product_function(&e, &p3, &product_function(&e, &p2, &p1)).value(&x)?;
        Ok((a - b).abs())
    });
    run.check("product-gradient", heavy.div_ceil(2), 1e-5, |rng| {
        let (p1, p2) = (small_phase(&e, rng), small_phase(&e, rng));
        let x = cube(rng, d, 0.5 * r);
        let prod = product_function(&e, &p2, &p1);
        let fd = fd_gradient(&|w: &Point| prod.value(w), &x, 1e-4)?;
        let g = SymplecticMap::compose(&generated_map(&e, &p2), &generated_map(&e, &p1));
        Ok(dist(&fd, &phase_gradient(&e, &g, &x)?))
    });
    let darboux = e.name().starts_with("darboux");
    run.check("group-law", heavy.div_ceil(2), 1e-5, |rng| {
        let sys = if darboux { small_system(rng, d, 0.5) } else { HamiltonianSystem::harmonic_oscillator() };
        let (t, tau) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let x = cube(rng, d, 0.6 * r);
        let sum = dynamic_phase_function(&e, &sys, t + tau).value(&x)?;
        let prod = phase_product(&e, &dynamic_phase_function(&e, &sys, tau), &dynamic_phase_function(&e, &sys, t), &x)?;
        Ok((sum - prod).abs())
    });
    run.check("composition-identity", heavy.div_ceil(2), 1e-5, |rng| {
        let (g1, g2) = (small_map(&e, rng), small_map(&e, rng));
        let g = SymplecticMap::compose(&g2, &g1);
        let y = cube(rng, d, 0.4 * r);
        let yt = fixed_midpoint(&e, &g, &y)?;
        let g1y = g1.apply(&yt)?;
        let y1 = e.midpoint(&g1y, &yt)?;
        let y2 = e.midpoint(&g.apply(&yt)?, &g1y)?;
        let x = near(rng, &y, 0.3);
        let lhs = phase_product(&e, &phase_of_map(&e, &g2, &y2), &phase_of_map(&e, &g1, &y1), &x)?;
        let rhs = normalized_phase(&e, &g, &x, &y)? + triangle_phase(&e, &y, &y2, &y1)?;
        Ok((lhs - rhs).abs())
    });
    run.check("product-stationary", heavy.div_ceil(4), 1e-7, |rng| {
        let (p1, p2) = (small_phase(&e, rng), small_phase(&e, rng));
        let x = cube(rng, d, 0.5 * r);
        Ok((phase_product(&e, &p2, &p1, &x)? - phase_product_stationary(&e, &p2, &p1, &x)?.value).abs())
    });
}

fn groupoid(run: &mut Runner) {
    let e = run.e.clone();
    let (n, heavy) = (run.cfg.samples, run.cfg.heavy_samples);
    let (r, d) = (radius(&e), e.dim());

    run.check("lie-engel", n, 1e-6, |rng| lie_engel_residual(&e, &element(&e, rng, 0.3)));
    run.check("left-right-relation", n, 1e-7, |rng| {
        let m = element(&e, rng, 0.3);
        Ok(dist(&e.reflection(&m.base, &right_map(&e, &m)?)?, &left_map(&e, &m)?))
    });
    run.check("expansion-zeroth-order", n, 1e-10, |rng| {
        let u = GroupoidElement::unit(&cube(rng, d, r));
        Ok(dist(&left_map(&e, &u)?, &u.base).max(dist(&right_map(&e, &u)?, &u.base)))
    });
    run.check("expansion-first-order", heavy, 1e-5, |rng| {
        let x = cube(rng, d, 0.6 * r);
        let first = e
            .hamiltonian_dz(&x, &x)?
            .try_inverse()
            .ok_or_else(|| EtherError::Singular { context: "D_zH on the diagonal".into() })?;
        let f = |p: &Point| left_map(&e, &GroupoidElement::new(x.clone(), p.clone()));
        let fd = fd_jacobian(&f, &Point::zeros(d), 1e-5)?;
        let mut res = (fd - &first).amax();
        if e.involutive() {
            res = res.max((first - e.fixture.psi(&x) * 0.5).amax());
        }
        Ok(res)
    });
    if e.involutive() {
        run.check("expansion-second-order", heavy.div_ceil(4), 1e-3, |rng| {
            let x = cube(rng, d, 0.6 * r);
            second_order_defect(&e, &x)
        });
    }
    run.check("groupoid-associativity", heavy, 1e-7, |rng| {
        let m3 = element(&e, rng, 0.2);
        let r3 = right_map(&e, &m3)?;
        let q = near(rng, &r3, 0.2);
        let m2 = element_of_pair(&e, &r3, &q)?;
        let w = near(rng, &q, 0.2);
        let m1 = element_of_pair(&e, &q, &w)?;
        let a = groupoid_multiply(&e, &groupoid_multiply(&e, &m3, &m2)?, &m1)?;
        let b = groupoid_multiply(&e, &m3, &groupoid_multiply(&e, &m2, &m1)?)?;
        Ok(dist(&a.base, &b.base).max(dist(&a.momentum, &b.momentum)))
    });
    run.check("groupoid-unit", heavy, 1e-7, |rng| {
        let m = element(&e, rng, 0.2);
        let right = groupoid_multiply(&e, &m, &GroupoidElement::unit(&right_map(&e, &m)?))?;
        let left = groupoid_multiply(&e, &GroupoidElement::unit(&left_map(&e, &m)?), &m)?;
        Ok([&right, &left].iter().map(|u| dist(&u.base, &m.base).max(dist(&u.momentum, &m.momentum))).fold(0.0, f64::max))
    });
    run.check("groupoid-inverse", heavy, 1e-7, |rng| {
        let m = element(&e, rng, 0.2);
        let inv = groupoid_inverse(&e, &m)?;
        let one = groupoid_multiply(&e, &m, &inv)?;
        let back = groupoid_inverse(&e, &inv)?;
        Ok(one
            .momentum
            .amax()
            .max(dist(&one.base, &left_map(&e, &m)?))
            .max(dist(&back.base, &m.base))
            .max(dist(&back.momentum, &m.momentum)))
    });
    if e.involutive() {
        run.check("lagrangian-product", heavy.div_ceil(2), 1e-5, |rng| {
            let (p1, p2) = (small_phase(&e, rng), small_phase(&e, rng));
            let x = cube(rng, d, 0.5 * r);
            let m = lagrangian_product_point(&e, &p2, &p1, &x)?;
            let prod = product_function(&e, &p2, &p1);
            let fd = fd_gradient(&|w: &Point| prod.value(w), &m.base, 1e-4)?;
            Ok(dist(&m.momentum, &fd).max(dist(&m.base, &x)))
        });
    }
}

/// `∂²ℓˡ/∂p_a∂p_b + ¼ Γˡ_km Ψᵏᵃ Ψᵐᵇ` at `p = 0`.
fn second_order_defect(e: &EtherStructure, x: &Point) -> Result<f64> {
    let d = x.len();
    let h = 1e-3;
    let f = |p: &Point| left_map(e, &GroupoidElement::new(x.clone(), p.clone()));
    let gamma = e.connection(x)?;
    let psi = e.fixture.psi(x);
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let mut ea = Point::zeros(d);
            let mut eb = Point::zeros(d);
            ea[a] = h;
            eb[b] = h;
            let second = (f(&(&ea + &eb))? - f(&(&ea - &eb))? - f(&(&eb - &ea))? + f(&(-&ea - &eb))?) / (4.0 * h * h);
            for l in 0..d {
                let mut v = 0.0;
                for k in 0..d {
                    for m in 0..d {
                        v += gamma.get(l, k, m) * psi[(k, a)] * psi[(m, b)];
                    }
                }
                worst = worst.max((second[l] + 0.25 * v).abs());
            }
        }
    }
    Ok(worst)
}

/// Circle adapted to the fixture's sampling region.
fn test_circle(e: &EtherStructure) -> LagrangianCurve {
    LagrangianCurve::circle(point(&[0.0, 0.0]), radius(e).min(1.0) * if is_sphere(e) { 0.8 } else { 1.0 })
}

/// Point strictly inside the circle and away from its centre.
fn inner_point(rng: &mut ChaCha8Rng, rad: f64) -> Point {
    let rho = rng.gen_range(0.2..0.7) * rad;
    let phi = rng.gen_range(0.0..2.0 * PI);
    point(&[rho * phi.cos(), rho * phi.sin()])
}

fn chords(run: &mut Runner) {
    let e = run.e.clone();
    let heavy = run.cfg.heavy_samples;
    let lam = test_circle(&e);
    let rad = lam.point(0.0).norm();

    if e.name().starts_with("euclid") {
        run.check("chord-circle-area", 1, 1e-6, |_| {
            let v = chord_phase(&e, &LagrangianCurve::circle(point(&[0.0, 0.0]), 1.0), &point(&[0.5, 0.0]))?;
            Ok((v - ((0.5f64).acos() - 0.5 * (0.75f64).sqrt())).abs())
        });
    }
    run.check("chord-gradient", heavy.div_ceil(2), 1e-5, |rng| {
        let x = inner_point(rng, rad);
        let phi = chord_phase_function(&e, &lam);
        let fd = fd_gradient(&|w: &Point| chord_phase(&e, &lam, w), &x, 1e-4)?;
        Ok(dist(&fd, &phi.gradient(&x, 1e-5)?))
    });
    run.check("chord-hamilton-jacobi", heavy, 1e-6, |rng| {
        let x = inner_point(rng, rad);
        Ok(chord_hj_residual(&e, &lam, &x, 1.0)?.max(chord_hj_residual(&e, &lam, &x, -1.0)?))
    });
    run.check("chord-boundary", heavy, 1e-8, |rng| {
        let s = rng.gen_range(0.0..2.0 * PI);
        Ok(chord_phase(&e, &lam, &lam.point(s))?.abs())
    });
    run.check("chord-reversal", heavy, 1e-7, |rng| {
        let c = chord_find(&e, &lam, &inner_point(rng, rad))?;
        Ok((chord_phase_oriented(&e, &lam, &c)? + chord_phase_oriented(&e, &lam, &c.reversed())?).abs())
    });
    let shifted = LagrangianCurve::circle(point(&[0.2 * rad, 0.0]), 0.9 * rad);
    run.check("chord-flow-product", heavy.div_ceil(4), 1e-5, |rng| {
        let osc = HamiltonianSystem::harmonic_oscillator();
        let t = rng.gen_range(-0.3..0.3);
        let x = &inner_point(rng, 0.6 * rad) + point(&[0.2 * rad, 0.0]);
        let v = chord_product(&e, &shifted, &osc, &x, t)?.value;
        let g = phase_product_stationary(&e, &dynamic_phase_function(&e, &osc, t), &chord_phase_function(&e, &shifted), &x)?;
        Ok((v - g.value).abs())
    });
}

fn extension_cases(e: &EtherStructure) -> [Extension; 2] {
    [
        Extension::Section(dynamic_phase_function(e, &HamiltonianSystem::harmonic_oscillator(), 1.0)),
        Extension::Chord(test_circle(e)),
    ]
}

fn extensions(run: &mut Runner) {
    let e = run.e.clone();
    let heavy = run.cfg.heavy_samples;
    let rad = test_circle(&e).point(0.0).norm();
    let cases = extension_cases(&e);

    run.check("extension-gradient", heavy.div_ceil(4), 1e-5, |rng| {
        let x = inner_point(rng, 0.8 * rad);
        let mut worst: f64 = 0.0;
        for ext in &cases {
            let y0 = ext.restriction_point(&e, &x)?;
            let y = match ext {
                Extension::Section(_) => &y0 + cube(rng, 2, 0.06),
                // stay inside the disc so the chord pair exists
                Extension::Chord(_) => &y0 * rng.gen_range(0.9..0.97),
            };
            let p = extension_point(&e, ext, &x, &y, None)?;
            let dx = fd_gradient(&|w: &Point| extension_phase(&e, ext, w, &y), &x, 1e-4)?;
            let dy = fd_gradient(&|w: &Point| extension_phase(&e, ext, &x, w), &y, 1e-4)?;
            worst = worst.max(dist(&dx, &e.hamiltonian(&x, &p.b)?)).max(dist(&dy, &-e.hamiltonian(&y, &p.a)?));
        }
        Ok(worst)
    });
    run.check("extension-restriction", heavy.div_ceil(4), 1e-6, |rng| {
        let x = inner_point(rng, 0.8 * rad);
        let mut worst: f64 = 0.0;
        for ext in &cases {
            let y = ext.restriction_point(&e, &x)?;
            let want = match ext {
                Extension::Section(phi) => phi.value(&x)?,
                Extension::Chord(lam) => chord_phase(&e, lam, &x)?,
            };
            worst = worst.max((extension_phase(&e, ext, &x, &y)? - want).abs());
        }
        Ok(worst)
    });
    run.check("operator-identities", heavy.max(20), 1e-5, |rng| {
        let (p1, p2) = (small_phase(&e, rng), small_phase(&e, rng));
        let x = cube(rng, 2, 0.5 * radius(&e));
        let q = near(rng, &x, 0.2);
        Ok(operator_calculus_check(&e, &p1, &p2, &x, &q)?.max())
    });
}

fn hamilton_jacobi(run: &mut Runner) {
    let e = run.e.clone();
    let heavy = run.cfg.heavy_samples;
    let d = e.dim();
    let reach = if is_sphere(&e) { 0.4 } else { radius(&e).min(0.8) };
    let osc = HamiltonianSystem::harmonic_oscillator();

    run.check("hj-dynamic", heavy.div_ceil(2), 1e-4, |rng| {
        let (e1, s1) = (e.clone(), osc.clone());
        let phi = TimePhase::new(move |x, t| dynamic_phase(&e1, &s1, x, t));
        let t = rng.gen_range(-1.0..1.0);
        hj_residual(&e, &osc, &phi, &cube(rng, d, reach), t)
    });
    run.check("hj-product", heavy.div_ceil(4), 1e-4, |rng| {
        let phi0 = small_phase(&e, rng);
        let (e1, s1) = (e.clone(), osc.clone());
        let phi = TimePhase::new(move |x, t| {
            if t == 0.0 {
                return phi0.value(x);
            }
            phase_product(&e1, &dynamic_phase_function(&e1, &s1, t), &phi0, x)
        });
        let t = rng.gen_range(-1.0..1.0);
        hj_residual(&e, &osc, &phi, &cube(rng, d, reach), t)
    });
    run.check("hj-constant", 1, 1e-12, |_| {
        let sys = HamiltonianSystem::constant(0.7);
        let phi = TimePhase::new(|_, t| Ok(-0.7 * t));
        hj_residual(&e, &sys, &phi, &Point::zeros(d), 0.0)
    });
}

fn torsion(run: &mut Runner) {
    let e = run.e.clone();
    let heavy = run.cfg.heavy_samples;
    let d = e.dim();

    run.check("torsion-membranes", heavy.div_ceil(4), 1e-5, |rng| {
        let sys = small_system(rng, d, 0.5);
        let gamma = flow_map(&sys, &e.fixture, 0.3);
        let points: Vec<Point> = (0..3).map(|_| cube(rng, d, 0.4)).collect();
        Ok(torsion_phase_suite(&e, &gamma, &sys, &points, 0.3)?.max())
    });
    run.check("torsion-limit", 1, 1e-5, |_| {
        let sys = HamiltonianSystem::harmonic_oscillator();
        let (x, y) = (point(&[0.3, -0.2]), point(&[-0.25, 0.35]));
        let value = |e: &EtherStructure| -> Result<f64> {
            let g = flow_map(&sys, &e.fixture, 0.4);
            Ok(normalized_phase(e, &g, &x, &y)? + dynamic_phase(e, &sys, &x, 0.4)?)
        };
        Ok((value(&make_torsion_fixture(1e-7)?)? - value(&euclid_weyl(1))?).abs())
    });
}
