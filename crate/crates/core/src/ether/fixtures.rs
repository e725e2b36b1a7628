//! Built-in structures with independent closed-form or constructive oracles.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EtherError, Result};
use crate::ether::{ether_from_reflections, EtherModel, EtherStructure, ReflectionFamily};
use crate::geometry::{standard_omega, Covector, Matrix, NumericSettings, Point, SymplecticFixture, Vector};
use crate::torsion::TorsionConst;

pub const FIXTURE_NAMES: [&str; 4] = ["euclid_weyl_2n", "darboux_pullback", "sphere_chart", "torsion_const"];

/// Fixture selection as it appears in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixtureSpec {
    pub name: String,
    /// Number of canonical pairs (standard charts only).
    pub n: usize,
    /// Shear strength of the Darboux pullback.
    pub epsilon: f64,
    /// Torsion parameter `b` in `A = 2ω + diag(b, 0)`.
    pub b: f64,
    pub validity_radius: Option<f64>,
    /// Multiply `H` by this factor (detector sanity runs).
    pub scale_h: Option<f64>,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self { name: "euclid_weyl_2n".into(), n: 1, epsilon: 0.3, b: 1.0, validity_radius: None, scale_h: None }
    }
}

impl FixtureSpec {
    pub fn named(name: &str) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    pub fn build(&self, settings: NumericSettings) -> Result<EtherStructure> {
        settings.validate()?;
        if self.n == 0 || self.n > 8 {
            return Err(EtherError::Parameter(format!("pair count {} outside 1..=8", self.n)));
        }
        let mut e = match self.name.as_str() {
            "euclid_weyl_2n" => euclid_weyl(self.n),
            "darboux_pullback" => darboux_pullback(self.n, self.epsilon)?,
            "sphere_chart" => sphere_chart(),
            "torsion_const" => TorsionConst::new(self.b)?.structure(),
            other => {
                return Err(EtherError::Parameter(format!("unknown fixture `{other}` (known: {})", FIXTURE_NAMES.join(", "))))
            }
        };
        e.fixture = e.fixture.with_settings(settings);
        if let Some(r) = self.validity_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(EtherError::Parameter("validity radius must be positive".into()));
            }
            e.validity_radius = r;
        }
        if let Some(k) = self.scale_h {
            e = scaled(e, k);
        }
        Ok(e)
    }
}

/// Euclidean Weyl structure `H_x(z) = 2ω(z - x)` on the standard chart.
pub struct EuclidWeyl {
    dim: usize,
}

impl EtherModel for EuclidWeyl {
    fn name(&self) -> &str {
        "euclid_weyl_2n"
    }

    fn hamiltonian(&self, _fix: &SymplecticFixture, x: &Point, z: &Point) -> Result<Covector> {
        Ok(standard_omega(self.dim) * (z - x) * 2.0)
    }

    fn hamiltonian_dz(&self, _fix: &SymplecticFixture, _x: &Point, _z: &Point) -> Option<Result<Matrix>> {
        Some(Ok(standard_omega(self.dim) * 2.0))
    }

    fn reflection(&self, x: &Point, z: &Point) -> Option<Result<Point>> {
        Some(Ok(x * 2.0 - z))
    }

    fn reflection_dx(&self, _x: &Point, _z: &Point) -> Option<Result<Matrix>> {
        Some(Ok(Matrix::identity(self.dim, self.dim) * 2.0))
    }

    fn exp(&self, x: &Point, v: &Vector) -> Option<Result<Point>> {
        Some(Ok(x + v))
    }

    fn log(&self, x: &Point, z: &Point) -> Option<Result<Vector>> {
        Some(Ok(z - x))
    }

    fn describe(&self) -> Vec<String> {
        vec!["H_x(z) = 2ω(z - x)".into(), "s_x(z) = 2x - z".into(), "Exp_x(v) = x + v".into()]
    }
}

pub fn euclid_weyl(n: usize) -> EtherStructure {
    EtherStructure::new(SymplecticFixture::standard(n, 10.0), Arc::new(EuclidWeyl { dim: 2 * n }), 8.0)
}

/// Euclidean structure conjugated by the symplectic shear
/// `φ(q, p) = (q, p + εq²)` applied to every pair.
pub struct DarbouxPullback {
    dim: usize,
    eps: f64,
}

impl DarbouxPullback {
    fn phi(&self, u: &Point) -> Point {
        let mut w = u.clone();
        for k in 0..self.dim / 2 {
            w[2 * k + 1] += self.eps * u[2 * k] * u[2 * k];
        }
        w
    }

    fn phi_inv(&self, w: &Point) -> Point {
        let mut u = w.clone();
        for k in 0..self.dim / 2 {
            u[2 * k + 1] -= self.eps * w[2 * k] * w[2 * k];
        }
        u
    }

    /// Jacobian of `φ` at `u`; `sign = -1` gives the Jacobian of `φ⁻¹` at `φ(u)`.
    fn d_phi(&self, u: &Point, sign: f64) -> Matrix {
        let mut m = Matrix::identity(self.dim, self.dim);
        for k in 0..self.dim / 2 {
            m[(2 * k + 1, 2 * k)] = sign * 2.0 * self.eps * u[2 * k];
        }
        m
    }
}

impl EtherModel for DarbouxPullback {
    fn name(&self) -> &str {
        "darboux_pullback"
    }

    fn hamiltonian(&self, _fix: &SymplecticFixture, x: &Point, z: &Point) -> Result<Covector> {
        let w = standard_omega(self.dim) * (self.phi(z) - self.phi(x)) * 2.0;
        Ok(self.d_phi(x, 1.0).transpose() * w)
    }

    fn hamiltonian_dz(&self, _fix: &SymplecticFixture, x: &Point, z: &Point) -> Option<Result<Matrix>> {
        Some(Ok(self.d_phi(x, 1.0).transpose() * standard_omega(self.dim) * self.d_phi(z, 1.0) * 2.0))
    }

    fn reflection(&self, x: &Point, z: &Point) -> Option<Result<Point>> {
        Some(Ok(self.phi_inv(&(self.phi(x) * 2.0 - self.phi(z)))))
    }

    fn reflection_dx(&self, x: &Point, z: &Point) -> Option<Result<Matrix>> {
        let w = self.phi(x) * 2.0 - self.phi(z);
        Some(Ok(self.d_phi(&w, -1.0) * self.d_phi(x, 1.0) * 2.0))
    }

    fn exp(&self, x: &Point, v: &Vector) -> Option<Result<Point>> {
        Some(Ok(self.phi_inv(&(self.phi(x) + self.d_phi(x, 1.0) * v))))
    }

    fn log(&self, x: &Point, z: &Point) -> Option<Result<Vector>> {
        // Dφ(x) is unipotent lower triangular; its inverse flips the shear sign.
        Some(Ok(self.d_phi(x, -1.0) * (self.phi(z) - self.phi(x))))
    }

    fn describe(&self) -> Vec<String> {
        vec![
            format!("φ(q, p) = (q, p + {}·q²) per pair", self.eps),
            "H_x(u) = Dφ(x)ᵀ 2ω(φ(u) - φ(x))".into(),
            "s_x(u) = φ⁻¹(2φ(x) - φ(u))".into(),
            "Exp_x(v) = φ⁻¹(φ(x) + Dφ(x) v)".into(),
        ]
    }
}

pub fn darboux_pullback(n: usize, eps: f64) -> Result<EtherStructure> {
    if !eps.is_finite() || eps.abs() > 2.0 {
        return Err(EtherError::Parameter(format!("shear ε = {eps} outside [-2, 2]")));
    }
    Ok(EtherStructure::new(SymplecticFixture::standard(n, 3.0), Arc::new(DarbouxPullback { dim: 2 * n, eps }), 2.0))
}

/// Upper hemisphere of the unit sphere in the stereographic chart,
/// reflections = rotations by π about the axis through `x`.
pub struct SphereChart {
    family: ReflectionFamily,
}

/// Chart point → unit vector.
pub fn sphere_lift(u: &Point) -> [f64; 3] {
    let d = 1.0 + 0.25 * (u[0] * u[0] + u[1] * u[1]);
    [u[0] / d, u[1] / d, 2.0 / d - 1.0]
}

/// Jacobian of [`sphere_lift`] as columns `∂_q P`, `∂_p P`.
fn sphere_lift_jacobian(u: &Point) -> [[f64; 3]; 2] {
    let (q, p) = (u[0], u[1]);
    let d = 1.0 + 0.25 * (q * q + p * p);
    let d2 = d * d;
    [[1.0 / d - 0.5 * q * q / d2, -0.5 * p * q / d2, -q / d2], [-0.5 * p * q / d2, 1.0 / d - 0.5 * p * p / d2, -p / d2]]
}

/// Unit vector → chart point; fails on the lower pole.
pub fn sphere_chart_of(v: [f64; 3]) -> Result<Point> {
    let den = 1.0 + v[2];
    if den < 1e-9 {
        return Err(EtherError::Domain { point: v.to_vec(), context: "sphere chart: antipode of the chart center".into() });
    }
    Ok(Point::from_vec(vec![2.0 * v[0] / den, 2.0 * v[1] / den]))
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sphere_reflect(x: &Point, z: &Point) -> Result<Point> {
    let (px, pz) = (sphere_lift(x), sphere_lift(z));
    let c = 2.0 * dot3(&px, &pz);
    sphere_chart_of([c * px[0] - pz[0], c * px[1] - pz[1], c * px[2] - pz[2]])
}

fn sphere_reflect_dx(x: &Point, z: &Point) -> Result<Matrix> {
    let (px, pz) = (sphere_lift(x), sphere_lift(z));
    let c = dot3(&px, &pz);
    let r: Vec<f64> = (0..3).map(|i| 2.0 * c * px[i] - pz[i]).collect();
    let den = 1.0 + r[2];
    if den < 1e-9 {
        return Err(EtherError::Domain { point: r, context: "sphere chart: reflection leaves the chart".into() });
    }
    let jp = sphere_lift_jacobian(x);
    let mut out = Matrix::zeros(2, 2);
    for (j, col) in jp.iter().enumerate() {
        let dc = dot3(&pz, col);
        let dr: Vec<f64> = (0..3).map(|i| 2.0 * dc * px[i] + 2.0 * c * col[i]).collect();
        out[(0, j)] = 2.0 * dr[0] / den - 2.0 * r[0] * dr[2] / (den * den);
        out[(1, j)] = 2.0 * dr[1] / den - 2.0 * r[1] * dr[2] / (den * den);
    }
    Ok(out)
}

impl SphereChart {
    pub fn new() -> Self {
        let mut family = ReflectionFamily::new(Arc::new(sphere_reflect));
        family.dx = Some(Arc::new(sphere_reflect_dx));
        Self { family }
    }

    pub fn family(&self) -> &ReflectionFamily {
        &self.family
    }
}

impl Default for SphereChart {
    fn default() -> Self {
        Self::new()
    }
}

impl EtherModel for SphereChart {
    fn name(&self) -> &str {
        "sphere_chart"
    }

    fn hamiltonian(&self, fix: &SymplecticFixture, x: &Point, z: &Point) -> Result<Covector> {
        ether_from_reflections(fix, &self.family, x, z)
    }

    /// `(D_z H)_{jk}(w) = Σ_l ∂_j s^l(s_x⁻¹(w)) ω_lk(w)`, the differentiated
    /// form of the reflection integral.
    fn hamiltonian_dz(&self, fix: &SymplecticFixture, x: &Point, z: &Point) -> Option<Result<Matrix>> {
        Some((|| {
            let pre = sphere_reflect(x, z)?;
            let ds = sphere_reflect_dx(x, &pre)?;
            Ok(ds.transpose() * fix.omega(z))
        })())
    }

    fn reflection(&self, x: &Point, z: &Point) -> Option<Result<Point>> {
        Some(sphere_reflect(x, z))
    }

    fn reflection_dx(&self, x: &Point, z: &Point) -> Option<Result<Matrix>> {
        Some(sphere_reflect_dx(x, z))
    }

    fn describe(&self) -> Vec<String> {
        vec![
            "P(q, p) = (q, p, 1 - r²/4) / (1 + r²/4)".into(),
            "s_x(z) = rotation by π about P(x)".into(),
            "H from the reflection integral along chart segments".into(),
            "Exp by Hamiltonian flow of ½ v·H_x".into(),
        ]
    }
}

pub fn sphere_chart() -> EtherStructure {
    EtherStructure::new(SymplecticFixture::sphere_chart(1.4), Arc::new(SphereChart::new()), 1.0)
}

/// Wrapper multiplying `H` by a constant while keeping the inner
/// reflections; breaks zero curvature for factors other than 1.
pub struct ScaledH {
    inner: Arc<dyn EtherModel>,
    factor: f64,
    label: String,
}

impl EtherModel for ScaledH {
    fn name(&self) -> &str {
        &self.label
    }

    fn involutive(&self) -> bool {
        self.inner.involutive()
    }

    fn hamiltonian(&self, fix: &SymplecticFixture, x: &Point, z: &Point) -> Result<Covector> {
        Ok(self.inner.hamiltonian(fix, x, z)? * self.factor)
    }

    fn hamiltonian_dz(&self, fix: &SymplecticFixture, x: &Point, z: &Point) -> Option<Result<Matrix>> {
        self.inner.hamiltonian_dz(fix, x, z).map(|m| m.map(|m| m * self.factor))
    }

    fn reflection(&self, x: &Point, z: &Point) -> Option<Result<Point>> {
        self.inner.reflection(x, z)
    }

    fn reflection_inverse(&self, x: &Point, z: &Point) -> Option<Result<Point>> {
        self.inner.reflection_inverse(x, z)
    }

    fn reflection_dx(&self, x: &Point, z: &Point) -> Option<Result<Matrix>> {
        self.inner.reflection_dx(x, z)
    }

    fn describe(&self) -> Vec<String> {
        let mut d = self.inner.describe();
        d.push(format!("H scaled by {}", self.factor));
        d
    }
}

pub fn scaled(e: EtherStructure, factor: f64) -> EtherStructure {
    let label = format!("{}*{}", e.name(), factor);
    let radius = e.validity_radius;
    let model = ScaledH { inner: e.model.clone(), factor, label };
    EtherStructure::new(e.fixture, Arc::new(model), radius)
}
