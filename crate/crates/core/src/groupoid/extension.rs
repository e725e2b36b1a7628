//! Two-point extensions `Φ#(x, y)` of a phase function and pointwise checks
//! of the operator calculus on sections.
//!
//! For a Lagrangian `M ⊂ X × X̄` (the graph of a map or `λ × λ`) the
//! extension at `(x, y)` uses the pair `(b, a) ∈ M` with `b = s_x s_y a`.
//! With `Z` the mid-point of `(b, a)`,
//! `Φ#(x, y) = Φ(Z) + area of the triangle A = b, B = s_x(b), C = a`.
//! Then `∂_x Φ# = H_x(b)` and `∂_y Φ# = -H_y(a)`.

use crate::error::{EtherError, Result};
use crate::ether::EtherStructure;
use crate::geometry::{newton_solve, Point};
use crate::groupoid::chord::{chord_find, chord_phase_oriented, feet_candidates, solve_feet, Chord, LagrangianCurve};
use crate::groupoid::{
    element_of_pair, groupoid_inverse, groupoid_multiply, left_map, right_map, section_element, GroupoidElement,
};
use crate::phase_maps::{fixed_midpoint, generated_map, PhaseFunction};
use crate::phase_product::{phase_product_stationary, TriangleMembrane};

/// What is being extended.
#[derive(Debug, Clone)]
pub enum Extension {
    /// A phase function generating a map `γ`; `M` is the graph of `γ`.
    Section(PhaseFunction),
    /// The chord function of `λ`; `M = λ × λ`.
    Chord(LagrangianCurve),
}

/// Solution of the extension problem at `(x, y)`.
#[derive(Debug, Clone)]
pub struct ExtensionPoint {
    pub value: f64,
    pub a: Point,
    pub b: Point,
    pub z: Point,
    pub triangle: TriangleMembrane,
}

fn require_involutive(e: &EtherStructure) -> Result<()> {
    if !e.involutive() {
        return Err(EtherError::Parameter("extensions need an involutive structure".into()));
    }
    Ok(())
}

impl Extension {
    /// `Y(x)`: the `y` with `(s_x(y), y) ∈ M`, so that `Φ#(x, Y(x)) = Φ(x)`.
    pub fn restriction_point(&self, e: &EtherStructure, x: &Point) -> Result<Point> {
        match self {
            Extension::Section(phi) => fixed_midpoint(e, &generated_map(e, phi), x),
            Extension::Chord(lam) => Ok(chord_find(e, lam, x)?.b),
        }
    }

    fn base_value(&self, e: &EtherStructure, b: &Point, a: &Point, feet: Option<(f64, f64)>, z: &Point) -> Result<f64> {
        match self {
            Extension::Section(phi) => phi.value(z),
            Extension::Chord(lam) => {
                let (s_a, s_b) = feet.expect("chord extensions carry feet");
                let degenerate = (b - a).norm() < 1e-10;
                chord_phase_oriented(
                    e,
                    lam,
                    &Chord { x: z.clone(), a: b.clone(), b: a.clone(), s_a: s_b, s_b: s_a, degenerate, reversed: false },
                )
            }
        }
    }
}

fn assemble(
    e: &EtherStructure,
    ext: &Extension,
    x: &Point,
    y: &Point,
    a: Point,
    b: Point,
    feet: Option<(f64, f64)>,
) -> Result<ExtensionPoint> {
    let z = e.midpoint(&b, &a).map_err(|err| err.at_stage("extension mid-point"))?;
    let triangle =
        TriangleMembrane { midpoints: [z.clone(), y.clone(), x.clone()], vertices: [b.clone(), e.reflection(x, &b)?, a.clone()] };
    let value = ext.base_value(e, &b, &a, feet, &z)? + triangle.area(e)?;
    Ok(ExtensionPoint { value, a, b, z, triangle })
}

/// `Φ#(x, y)`.  `seed` is an initial guess for `a`; by default the map case
/// starts at `y` and the chord case scans `λ` and keeps the solution whose
/// mid-point is closest to `x`.
pub fn extension_point(
    e: &EtherStructure,
    ext: &Extension,
    x: &Point,
    y: &Point,
    seed: Option<&Point>,
) -> Result<ExtensionPoint> {
    require_involutive(e)?;
    match ext {
        Extension::Section(phi) => {
            let gamma = generated_map(e, phi);
            let residual = |a: &Point| Ok(gamma.apply(a)? - e.reflection(x, &e.reflection(y, a)?)?);
            let a0 = seed.cloned().unwrap_or_else(|| y.clone());
            let a = newton_solve(residual, &a0, &e.fixture.settings.newton()).map_err(|err| err.at_stage("extension pair"))?.x;
            let b = gamma.apply(&a)?;
            assemble(e, ext, x, y, a, b, None)
        }
        Extension::Chord(lam) => {
            let target = |p: &Point| e.reflection(y, p);
            let feet: Vec<(f64, f64)> = match seed {
                Some(a0) => {
                    let (s, _) = lam.nearest(a0);
                    let b0 = e.reflection(x, &e.reflection(y, a0)?)?;
                    let (t, _) = lam.nearest(&b0);
                    vec![solve_feet(e, lam, x, target, (s, t))?]
                }
                None => feet_candidates(e, lam, x, target),
            };
            let mut best: Option<(f64, ExtensionPoint)> = None;
            for (s_a, s_b) in feet {
                let Ok(p) = assemble(e, ext, x, y, lam.point(s_a), lam.point(s_b), Some((s_a, s_b))) else {
                    continue;
                };
                let d = (&p.z - x).norm();
                if best.as_ref().is_none_or(|(bd, _)| d < *bd - 1e-12) {
                    best = Some((d, p));
                }
            }
            best.map(|(_, p)| p).ok_or_else(|| EtherError::NotInDomain {
                context: format!("extension: no pair of {} for ({:?}, {:?})", lam.label, x.as_slice(), y.as_slice()),
            })
        }
    }
}

pub fn extension_phase(e: &EtherStructure, ext: &Extension, x: &Point, y: &Point) -> Result<f64> {
    extension_point(e, ext, x, y, None).map(|p| p.value)
}

/// Largest residual of each product identity, plus the unit laws.
#[derive(Debug, Clone, Default)]
pub struct OperatorReport {
    pub entries: Vec<(String, f64)>,
}

impl OperatorReport {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    fn push(&mut self, name: &str, r: f64) {
        self.entries.push((name.to_string(), r));
    }
}

/// `|p - dΦ(x)|` for `m = (x, p)`.
fn off_section(e: &EtherStructure, phi: &PhaseFunction, m: &GroupoidElement) -> Result<f64> {
    Ok((&m.momentum - phi.gradient(&m.base, e.fixture.settings.h_fd)?).amax())
}

/// Factors `(outer, inner)` of `Λ_outer ⊙ Λ_inner` over `x`.
fn product_factors(
    e: &EtherStructure,
    outer: &PhaseFunction,
    inner: &PhaseFunction,
    x: &Point,
) -> Result<(GroupoidElement, GroupoidElement, GroupoidElement)> {
    let p = phase_product_stationary(e, outer, inner, x)?;
    let m2 = section_element(e, outer, &p.x2)?;
    let m1 = section_element(e, inner, &p.x1)?;
    let m = groupoid_multiply(e, &m2, &m1)?;
    Ok((m2, m1, m))
}

/// Witness checks of the division identities on `Λ₁ = Λ^Φ₁`, `Λ₂ = Λ^Φ₂`
/// at the mid-point `x`; `q` is an auxiliary point used to split a product.
pub fn operator_calculus_check(
    e: &EtherStructure,
    phi1: &PhaseFunction,
    phi2: &PhaseFunction,
    x: &Point,
    q: &Point,
) -> Result<OperatorReport> {
    require_involutive(e)?;
    let mut rep = OperatorReport::default();
    let mul = |a: &GroupoidElement, b: &GroupoidElement| groupoid_multiply(e, a, b);
    let inv = |a: &GroupoidElement| groupoid_inverse(e, a);

    // Λ₁⊙Λ₂: k ∘ n
    let (k, n, m) = product_factors(e, phi1, phi2, x)?;
    let w = inv(&n)?;
    let r = off_section(e, phi1, &mul(&m, &w)?)?.max(off_section(e, phi2, &inv(&w)?)?);
    rep.push("right-division", r);

    // Λ₂⊙Λ₁: n ∘ k
    let (n2, k2, m_b) = product_factors(e, phi2, phi1, x)?;
    let w = inv(&n2)?;
    rep.push("left-division", off_section(e, phi1, &mul(&w, &m_b)?)?);

    // split k ∘ n = m″ ∘ m′ through an arbitrary point
    let m1 = element_of_pair(e, q, &right_map(e, &m)?)?;
    let m2 = mul(&m, &inv(&m1)?)?;
    let w = mul(&inv(&m2)?, &k)?;
    let r = off_section(e, phi1, &mul(&m2, &w)?)?.max(off_section(e, phi2, &mul(&inv(&w)?, &m1)?)?);
    rep.push("split-inner", r);

    // split n ∘ k = m′ ∘ m″
    let m2 = element_of_pair(e, q, &right_map(e, &m_b)?)?;
    let m1 = mul(&m_b, &inv(&m2)?)?;
    let w = mul(&k2, &inv(&m2)?)?;
    let r = off_section(e, phi1, &mul(&w, &m2)?)?.max(off_section(e, phi2, &mul(&m1, &inv(&w)?)?)?);
    rep.push("split-outer", r);

    // triangle of pairs through k = (A, C) and n
    let (pa, pc) = (left_map(e, &k)?, right_map(e, &k)?);
    let bp = right_map(e, &n)?;
    let m2 = element_of_pair(e, &pa, &bp)?;
    let mid = element_of_pair(e, &bp, &pc)?;
    let m1 = mul(&n, &mid)?;
    let mu = element_of_pair(e, &left_map(e, &m1)?, &left_map(e, &m2)?)?;
    let r = off_section(e, phi2, &mul(&mu, &m2)?)?.max(off_section(e, phi1, &mul(&inv(&mu)?, &m1)?)?);
    rep.push("pair-triangle", r);

    // unit laws
    let back = inv(&inv(&m)?)?;
    let r = (&back.momentum - &m.momentum).amax().max((&back.base - &m.base).amax());
    let unit = mul(&m, &inv(&m)?)?;
    rep.push("inverse", r.max(unit.momentum.amax()));
    Ok(rep)
}
