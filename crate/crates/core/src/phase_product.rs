//! Triangle phases and the product of phase functions.

use crate::error::{EtherError, Result};
use crate::ether::EtherStructure;
use crate::geometry::{newton_solve, Membrane, Point, Vector};
use crate::groupoid::section_pair;
use crate::phase_maps::{fixed_midpoint, generated_map, phase_gradient, PhaseFunction, SymplecticMap};

/// Three geodesic sides through the mid-points `z` (A→B), `y` (B→C) and
/// `x` (A→C, traversed backwards).
#[derive(Debug, Clone)]
pub struct TriangleMembrane {
    pub midpoints: [Point; 3],
    pub vertices: [Point; 3],
}

impl TriangleMembrane {
    pub fn membrane(&self, e: &EtherStructure) -> Result<Membrane> {
        let [x, y, z] = &self.midpoints;
        let [a, b, c] = &self.vertices;
        let [ab1, ab2] = e.geodesic_pieces(z, a, b)?;
        let [bc1, bc2] = e.geodesic_pieces(y, b, c)?;
        let [ac1, ac2] = e.geodesic_pieces(x, a, c)?;
        Ok(Membrane::new(vec![ab1, ab2, bc1, bc2, ac2.reversed(), ac1.reversed()]))
    }

    pub fn area(&self, e: &EtherStructure) -> Result<f64> {
        self.membrane(e)?.area(&e.fixture)
    }

    /// Largest mismatch between a side's mid-point and the stored one.
    pub fn midpoint_defect(&self, e: &EtherStructure) -> Result<f64> {
        let [x, y, z] = &self.midpoints;
        let [a, b, c] = &self.vertices;
        let dz = (e.midpoint(b, a)? - z).amax();
        let dy = (e.midpoint(c, b)? - y).amax();
        let dx = (e.midpoint(c, a)? - x).amax();
        Ok(dx.max(dy).max(dz))
    }
}

/// `(A, B, C)` with `A` the fixed point of `s_x⁻¹∘s_y∘s_z`, `B = s_z(A)`,
/// `C = s_y(B)`; then `s_x(A) = C`.
pub fn triangle_vertices(e: &EtherStructure, x: &Point, y: &Point, z: &Point) -> Result<(Point, Point, Point)> {
    let seed = x - y + z;
    let residual = |w: &Point| Ok(e.reflection_inverse(x, &e.reflection(y, &e.reflection(z, w)?)?)? - w);
    let a = newton_solve(residual, &seed, &e.fixture.settings.newton()).map(|r| r.x).map_err(|err| match err {
        EtherError::NoConvergence { .. } | EtherError::Singular { .. } => {
            EtherError::NotInDomain { context: format!("triangle_vertices: mid-points too spread ({err})") }
        }
        other => other,
    })?;
    let b = e.reflection(z, &a)?;
    let c = e.reflection(y, &b)?;
    Ok((a, b, c))
}

pub fn triangle(e: &EtherStructure, x: &Point, y: &Point, z: &Point) -> Result<TriangleMembrane> {
    let (a, b, c) = triangle_vertices(e, x, y, z)?;
    Ok(TriangleMembrane { midpoints: [x.clone(), y.clone(), z.clone()], vertices: [a, b, c] })
}

/// `Φ_{y,z}(x)`, the area of the triangle with side mid-points `x, y, z`.
pub fn triangle_phase(e: &EtherStructure, x: &Point, y: &Point, z: &Point) -> Result<f64> {
    triangle(e, x, y, z)?.area(e)
}

/// Intermediate points of the product at `x`.
#[derive(Debug, Clone)]
pub struct ProductPoint {
    pub value: f64,
    /// `x''`, `x'`, mid-points of the outer and inner factor.
    pub x2: Point,
    pub x1: Point,
    pub triangle: TriangleMembrane,
}

fn product_parts(
    e: &EtherStructure,
    phi2: &PhaseFunction,
    phi1: &PhaseFunction,
    g2: &SymplecticMap,
    g1: &SymplecticMap,
    x: &Point,
) -> Result<ProductPoint> {
    let g = SymplecticMap::compose(g2, g1);
    let xt = fixed_midpoint(e, &g, x).map_err(|err| err.at_stage("product: composed fixed point"))?;
    let g1x = g1.apply(&xt)?;
    let gx = g2.apply(&g1x)?;
    let x1 = e.midpoint(&g1x, &xt).map_err(|err| err.at_stage("product: inner mid-point"))?;
    let x2 = e.midpoint(&gx, &g1x).map_err(|err| err.at_stage("product: outer mid-point"))?;
    let tri = TriangleMembrane { midpoints: [x.clone(), x2.clone(), x1.clone()], vertices: [xt, g1x, gx] };
    let value = phi2.value(&x2)? + phi1.value(&x1)? + tri.area(e)?;
    Ok(ProductPoint { value, x2, x1, triangle: tri })
}

/// `(Φ″∘Φ′)(x)` by the explicit mid-point construction.
pub fn phase_product(e: &EtherStructure, phi2: &PhaseFunction, phi1: &PhaseFunction, x: &Point) -> Result<f64> {
    phase_product_point(e, phi2, phi1, x).map(|p| p.value)
}

pub fn phase_product_point(e: &EtherStructure, phi2: &PhaseFunction, phi1: &PhaseFunction, x: &Point) -> Result<ProductPoint> {
    let g1 = generated_map(e, phi1);
    let g2 = generated_map(e, phi2);
    product_parts(e, phi2, phi1, &g2, &g1, x)
}

/// `Φ″∘Φ′` as a phase function; gradient `H_x(γ(x̃))` of the composed map.
pub fn product_function(e: &EtherStructure, phi2: &PhaseFunction, phi1: &PhaseFunction) -> PhaseFunction {
    let g1 = generated_map(e, phi1);
    let g2 = generated_map(e, phi2);
    let g = SymplecticMap::compose(&g2, &g1);
    let (e1, p2, p1, h2, h1) = (e.clone(), phi2.clone(), phi1.clone(), g2.clone(), g1.clone());
    let (e2, gg) = (e.clone(), g.clone());
    PhaseFunction::new(format!("{}∘{}", phi2.label, phi1.label), move |x| {
        product_parts(&e1, &p2, &p1, &h2, &h1, x).map(|p| p.value)
    })
    .with_gradient(move |x| phase_gradient(&e2, &gg, x))
    .with_map(g)
}

/// `(Φ″∘Φ′)(x)` through the groupoid: find `x''`, `x'` with
/// `r(x'', dΦ″) = ℓ(x', dΦ′)` and `s_x(r(x', dΦ′)) = ℓ(x'', dΦ″)`.
/// Works for phases that generate no map (chord functions).
pub fn phase_product_stationary(
    e: &EtherStructure,
    phi2: &PhaseFunction,
    phi1: &PhaseFunction,
    x: &Point,
) -> Result<ProductPoint> {
    phase_product_stationary_seeded(e, phi2, phi1, x, None)
}

/// As [`phase_product_stationary`] with explicit seeds for `(x'', x')`.
pub fn phase_product_stationary_seeded(
    e: &EtherStructure,
    phi2: &PhaseFunction,
    phi1: &PhaseFunction,
    x: &Point,
    seed: Option<(Point, Point)>,
) -> Result<ProductPoint> {
    let n = x.len();
    let split = |u: &Vector| (u.rows(0, n).into_owned(), u.rows(n, n).into_owned());
    let residual = |u: &Vector| {
        let (x2, x1) = split(u);
        let (l2, r2) = section_pair(e, phi2, &x2)?;
        let (l1, r1) = section_pair(e, phi1, &x1)?;
        let mut out = Vector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&(r2 - &l1));
        out.rows_mut(n, n).copy_from(&(e.reflection(x, &r1)? - l2));
        Ok(out)
    };
    let (s2, s1) = seed.unwrap_or_else(|| (x.clone(), x.clone()));
    let mut u0 = Vector::zeros(2 * n);
    u0.rows_mut(0, n).copy_from(&s2);
    u0.rows_mut(n, n).copy_from(&s1);
    let sol = newton_solve(residual, &u0, &e.fixture.settings.newton()).map_err(|err| err.at_stage("stationary product"))?;
    let (x2, x1) = split(&sol.x);
    let (l2, _) = section_pair(e, phi2, &x2)?;
    let (l1, r1) = section_pair(e, phi1, &x1)?;
    let tri = TriangleMembrane { midpoints: [x.clone(), x2.clone(), x1.clone()], vertices: [r1, l1, l2] };
    let value = phi2.value(&x2)? + phi1.value(&x1)? + tri.area(e)?;
    Ok(ProductPoint { value, x2, x1, triangle: tri })
}

#[cfg(test)]
mod tests;
