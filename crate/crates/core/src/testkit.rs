//! Shared helpers for unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ether::fixtures::{darboux_pullback, euclid_weyl, sphere_chart};
use crate::ether::EtherStructure;
use crate::geometry::Point;
use crate::torsion::make_torsion_fixture;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the cube `[-r, r]^dim` around `center`.
pub fn near(rng: &mut ChaCha8Rng, center: &Point, r: f64) -> Point {
    center.map(|c| c + rng.gen_range(-r..r))
}

pub fn cube(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Point {
    Point::from_fn(dim, |_, _| rng.gen_range(-r..r))
}

/// The involutive fixtures with a safe sampling radius for base points.
pub fn involutive() -> Vec<(EtherStructure, f64)> {
    vec![(euclid_weyl(1), 1.0), (darboux_pullback(1, 0.3).unwrap(), 0.8), (sphere_chart(), 0.6)]
}

pub fn all() -> Vec<(EtherStructure, f64)> {
    let mut v = involutive();
    v.push((make_torsion_fixture(1.0).unwrap(), 1.0));
    v
}

pub fn assert_close(a: &Point, b: &Point, tol: f64, what: &str) {
    let d = (a - b).amax();
    assert!(d < tol, "{what}: {:?} vs {:?} (diff {d:.3e})", a.as_slice(), b.as_slice());
}
