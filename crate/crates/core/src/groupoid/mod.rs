//! The phase-space groupoid over the chart: left/right maps, products and
//! inverses, Lagrangian section products, chords and extensions.
//!
//! An element `(x, p)` corresponds to the pair `(ℓ, r)` with
//! `p = H_x(ℓ)` and `r = s_x⁻¹(ℓ)`; multiplication is transported from the
//! pair groupoid.  Brackets on `T*X` are taken with
//! `{f, g} = ∂_p f · ∂_x g - ∂_x f · ∂_p g`.

pub mod chord;
pub mod extension;
pub mod hj;

use crate::error::{EtherError, Result};
use crate::ether::EtherStructure;
use crate::geometry::{fd_jacobian, newton_solve, newton_solve_with_jacobian, Covector, Matrix, NewtonOptions, Point, Vector};
use crate::phase_maps::{fixed_midpoint, PhaseFunction};
use crate::phase_product::phase_product_stationary;

pub use chord::{
    chord_find, chord_hj_residual, chord_map_product, chord_phase, chord_phase_function, chord_phase_oriented, chord_product,
    Chord, ChordProduct, LagrangianCurve,
};
pub use extension::{extension_phase, extension_point, operator_calculus_check, Extension, ExtensionPoint, OperatorReport};
pub use hj::{hj_residual, TimePhase};

/// `(x, p)` with `p ∈ T*_x X`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupoidElement {
    pub base: Point,
    pub momentum: Covector,
}

impl GroupoidElement {
    pub fn new(base: Point, momentum: Covector) -> Self {
        Self { base, momentum }
    }

    pub fn unit(z: &Point) -> Self {
        Self::new(z.clone(), Covector::zeros(z.len()))
    }

    fn stacked(&self) -> Vector {
        let n = self.base.len();
        let mut v = Vector::zeros(2 * n);
        v.rows_mut(0, n).copy_from(&self.base);
        v.rows_mut(n, n).copy_from(&self.momentum);
        v
    }

    fn unstack(v: &Vector) -> Self {
        let n = v.len() / 2;
        Self::new(v.rows(0, n).into_owned(), v.rows(n, n).into_owned())
    }
}

/// Tolerance for `r(m″) = ℓ(m′)` in [`groupoid_multiply`].
pub const COMPOSABLE_TOL: f64 = 1e-8;

fn fibre_options(e: &EtherStructure) -> NewtonOptions {
    // ℓ feeds finite-difference brackets, so solve it below the usual tolerance.
    let mut o = e.fixture.settings.newton();
    o.tol *= 1e-2;
    o
}

/// `ℓ(x, p) = z` with `H_x(z) = p`, seeded at `x + ½Ψ(x)p`.
pub fn left_map(e: &EtherStructure, m: &GroupoidElement) -> Result<Point> {
    let x = &m.base;
    e.fixture.check_point(x, "left_map")?;
    if m.momentum.amax() == 0.0 {
        return Ok(x.clone());
    }
    let seed = x + e.fixture.psi(x) * &m.momentum * 0.5;
    newton_solve_with_jacobian(|z| Ok(e.hamiltonian(x, z)? - &m.momentum), |z| e.hamiltonian_dz(x, z), &seed, &fibre_options(e))
        .map(|r| r.x)
        .map_err(|err| match err {
            EtherError::NoConvergence { .. } | EtherError::Singular { .. } => {
                EtherError::NotInDomain { context: format!("left_map: momentum outside fibration neighborhood ({err})") }
            }
            other => other,
        })
}

/// `r(x, p)`: `ℓ(x, -p)` for involutive structures, `s_x⁻¹(ℓ(x, p))` otherwise.
pub fn right_map(e: &EtherStructure, m: &GroupoidElement) -> Result<Point> {
    if e.involutive() {
        left_map(e, &GroupoidElement::new(m.base.clone(), -&m.momentum))
    } else {
        e.reflection_inverse(&m.base, &left_map(e, m)?)
    }
}

/// Element with the prescribed pair `(ℓ, r)`: base `x` with `s_x(r) = ℓ`.
pub fn element_of_pair(e: &EtherStructure, l: &Point, r: &Point) -> Result<GroupoidElement> {
    let x = e.midpoint(l, r)?;
    let p = e.hamiltonian(&x, l)?;
    Ok(GroupoidElement::new(x, p))
}

/// `m″ ∘ m′`, defined when `r(m″) = ℓ(m′)`.
pub fn groupoid_multiply(e: &EtherStructure, m2: &GroupoidElement, m1: &GroupoidElement) -> Result<GroupoidElement> {
    let l2 = left_map(e, m2)?;
    let r2 = right_map(e, m2)?;
    let l1 = left_map(e, m1)?;
    let r1 = right_map(e, m1)?;
    let gap = (&r2 - &l1).amax();
    if gap > COMPOSABLE_TOL {
        return Err(EtherError::Parameter(format!("elements are not composable (|r(m″) - ℓ(m′)| = {gap:.3e})")));
    }
    let seed = element_of_pair(e, &l2, &r1)?;
    let residual = |v: &Vector| {
        let m = GroupoidElement::unstack(v);
        let n = m.base.len();
        let mut out = Vector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&(left_map(e, &m)? - &l2));
        out.rows_mut(n, n).copy_from(&(right_map(e, &m)? - &r1));
        Ok(out)
    };
    newton_solve(residual, &seed.stacked(), &e.fixture.settings.newton())
        .map(|r| GroupoidElement::unstack(&r.x))
        .map_err(|err| err.at_stage("groupoid_multiply"))
}

/// `m⁻¹`, the element with `ℓ` and `r` exchanged.
pub fn groupoid_inverse(e: &EtherStructure, m: &GroupoidElement) -> Result<GroupoidElement> {
    if e.involutive() {
        return Ok(GroupoidElement::new(m.base.clone(), -&m.momentum));
    }
    element_of_pair(e, &right_map(e, m)?, &left_map(e, m)?)
}

/// `(ℓ, r)` over `x` on the section `Λ^Φ = {(x, dΦ(x))}`.
pub fn section_pair(e: &EtherStructure, phi: &PhaseFunction, x: &Point) -> Result<(Point, Point)> {
    if let Some(m) = phi.attached_map() {
        let xt = fixed_midpoint(e, m, x)?;
        return Ok((m.apply(&xt)?, xt));
    }
    if let Some(ends) = phi.endpoints(x) {
        return ends;
    }
    let m = GroupoidElement::new(x.clone(), phi.gradient(x, e.fixture.settings.h_fd)?);
    Ok((left_map(e, &m)?, right_map(e, &m)?))
}

pub fn section_element(e: &EtherStructure, phi: &PhaseFunction, x: &Point) -> Result<GroupoidElement> {
    let (l, _) = section_pair(e, phi, x)?;
    Ok(GroupoidElement::new(x.clone(), e.hamiltonian(x, &l)?))
}

/// Point of `Λ″ ⊙ Λ′` over `x`; its momentum is `d(Φ″∘Φ′)(x)`.
pub fn lagrangian_product_point(
    e: &EtherStructure,
    phi2: &PhaseFunction,
    phi1: &PhaseFunction,
    x: &Point,
) -> Result<GroupoidElement> {
    let p = phase_product_stationary(e, phi2, phi1, x)?;
    let m2 = section_element(e, phi2, &p.x2)?;
    let m1 = section_element(e, phi1, &p.x1)?;
    groupoid_multiply(e, &m2, &m1)
}

/// Jacobian of `(x, p) ↦ f(x, p)` split as `(∂_x f, ∂_p f)`.
fn split_jacobian<F>(f: F, m: &GroupoidElement, h: f64) -> Result<(Matrix, Matrix)>
where
    F: Fn(&GroupoidElement) -> Result<Point>,
{
    let n = m.base.len();
    let j = fd_jacobian(&|v: &Vector| f(&GroupoidElement::unstack(v)), &m.stacked(), h)?;
    Ok((j.columns(0, n).into_owned(), j.columns(n, n).into_owned()))
}

/// Max-norm of the Lie–Engel residuals for arbitrary `ℓ`, `r`.
pub fn lie_engel_residual_of<L, R>(e: &EtherStructure, ell: L, r: R, m: &GroupoidElement) -> Result<f64>
where
    L: Fn(&GroupoidElement) -> Result<Point>,
    R: Fn(&GroupoidElement) -> Result<Point>,
{
    let h = e.fixture.settings.h_fd;
    let (lx, lp) = split_jacobian(&ell, m, h)?;
    let (rx, rp) = split_jacobian(&r, m, h)?;
    let bracket = |ax: &Matrix, ap: &Matrix, bx: &Matrix, bp: &Matrix| ap * bx.transpose() - ax * bp.transpose();
    let l = ell(m)?;
    let rr = r(m)?;
    let ll = bracket(&lx, &lp, &lx, &lp) - e.fixture.psi(&l);
    let rrr = bracket(&rx, &rp, &rx, &rp) - e.fixture.psi(&rr).transpose();
    let lr = bracket(&lx, &lp, &rx, &rp);
    Ok(ll.amax().max(rrr.amax()).max(lr.amax()))
}

/// `{ℓʲ,ℓᵏ} = Ψʲᵏ(ℓ)`, `{rʲ,rᵏ} = Ψᵏʲ(r)`, `{ℓʲ,rᵏ} = 0`.
pub fn lie_engel_residual(e: &EtherStructure, m: &GroupoidElement) -> Result<f64> {
    lie_engel_residual_of(e, |m| left_map(e, m), |m| right_map(e, m), m)
}

#[cfg(test)]
mod tests;
