//! Symplectic maps, their phase functions and back, and the dynamic phase
//! of Hamiltonian flows.
//!
//! For a map `γ` near the identity and a mid-point `x`, `x̃` is the fixed
//! point of `s_x⁻¹∘γ` (equal to `s_x∘γ` for reflections), so that
//! `γ(x̃) = s_x(x̃)`.  The phase gradient is `dΦ^γ(x) = H_x(γ(x̃))`.

use std::fmt;
use std::sync::Arc;

use crate::error::{EtherError, Result};
use crate::ether::EtherStructure;
use crate::geometry::{
    fd_gradient, fd_jacobian, integrate_endpoint, newton_solve, Covector, Curve, Matrix, Membrane, Point, SymplecticFixture,
};

type PointMap = Arc<dyn Fn(&Point) -> Result<Point> + Send + Sync>;
type JacobianFn = Arc<dyn Fn(&Point) -> Result<Matrix> + Send + Sync>;
type ScalarFn = Arc<dyn Fn(&Point) -> Result<f64> + Send + Sync>;
type GradientFn = Arc<dyn Fn(&Point) -> Result<Covector> + Send + Sync>;
type EndpointFn = Arc<dyn Fn(&Point) -> Result<(Point, Point)> + Send + Sync>;

/// A point transformation with optional closed-form Jacobian and inverse.
#[derive(Clone)]
pub struct SymplecticMap {
    pub label: String,
    apply: PointMap,
    jacobian: Option<JacobianFn>,
    inverse: Option<PointMap>,
}

impl fmt::Debug for SymplecticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymplecticMap").field("label", &self.label).finish()
    }
}

impl SymplecticMap {
    pub fn new<F>(label: impl Into<String>, apply: F) -> Self
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        Self { label: label.into(), apply: Arc::new(apply), jacobian: None, inverse: None }
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&Point) -> Result<Matrix> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_inverse<F>(mut self, inv: F) -> Self
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inv));
        self
    }

    pub fn identity(dim: usize) -> Self {
        Self::new("identity", |z: &Point| Ok(z.clone()))
            .with_jacobian(move |_| Ok(Matrix::identity(dim, dim)))
            .with_inverse(|z| Ok(z.clone()))
    }

    pub fn translation(a: Point) -> Self {
        let dim = a.len();
        let (a1, a2) = (a.clone(), a);
        Self::new("translation", move |z| Ok(z + &a1))
            .with_jacobian(move |_| Ok(Matrix::identity(dim, dim)))
            .with_inverse(move |z| Ok(z - &a2))
    }

    /// Linear map `z ↦ c + L(z - c)`.
    pub fn linear_about(center: Point, l: Matrix) -> Result<Self> {
        let inv = l.clone().try_inverse().ok_or_else(|| EtherError::Singular { context: "linear map".into() })?;
        let (c1, c2, l1, l2) = (center.clone(), center, l.clone(), l);
        Ok(Self::new("linear", move |z| Ok(&c1 + &l1 * (z - &c1)))
            .with_jacobian(move |_| Ok(l2.clone()))
            .with_inverse(move |z| Ok(&c2 + &inv * (z - &c2))))
    }

    pub fn apply(&self, z: &Point) -> Result<Point> {
        (self.apply)(z)
    }

    pub fn jacobian(&self, z: &Point, h: f64) -> Result<Matrix> {
        match &self.jacobian {
            Some(j) => j(z),
            None => fd_jacobian(&|w: &Point| self.apply(w), z, h),
        }
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// Closed-form inverse if present, otherwise Newton from `2z - γ(z)`.
    pub fn apply_inverse(&self, z: &Point) -> Result<Point> {
        if let Some(inv) = &self.inverse {
            return inv(z);
        }
        let seed = z * 2.0 - self.apply(z)?;
        newton_solve(|w| Ok(self.apply(w)? - z), &seed, &Default::default()).map(|r| r.x).map_err(|e| e.at_stage("map inverse"))
    }

    pub fn inverse(&self) -> Self {
        let me = self.clone();
        let mut out = Self::new(format!("{}⁻¹", self.label), move |z| me.apply_inverse(z));
        let fwd = self.apply.clone();
        out.inverse = Some(fwd);
        out
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &SymplecticMap, inner: &SymplecticMap) -> Self {
        let (o, i) = (outer.clone(), inner.clone());
        let (oi, ii) = (outer.clone(), inner.clone());
        let mut out = Self::new(format!("{}∘{}", outer.label, inner.label), move |z| o.apply(&i.apply(z)?));
        if outer.has_inverse() && inner.has_inverse() {
            out = out.with_inverse(move |z| ii.apply_inverse(&oi.apply_inverse(z)?));
        }
        out
    }

    /// `‖Jᵀ ω(γ(z)) J - ω(z)‖_max`.
    pub fn symplectic_defect(&self, fix: &SymplecticFixture, z: &Point) -> Result<f64> {
        let j = self.jacobian(z, fix.settings.h_fd)?;
        let image = self.apply(z)?;
        Ok((j.transpose() * fix.omega(&image) * &j - fix.omega(z)).amax())
    }
}

/// Scalar field with optional gradient, normalization point and the
/// symplectic map it is known to generate.
#[derive(Clone)]
pub struct PhaseFunction {
    pub label: String,
    value: ScalarFn,
    gradient: Option<GradientFn>,
    pub base: Option<Point>,
    map: Option<SymplecticMap>,
    endpoints: Option<EndpointFn>,
}

impl fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseFunction")
            .field("label", &self.label)
            .field("base", &self.base.as_ref().map(|b| b.as_slice().to_vec()))
            .finish()
    }
}

impl PhaseFunction {
    pub fn new<F>(label: impl Into<String>, value: F) -> Self
    where
        F: Fn(&Point) -> Result<f64> + Send + Sync + 'static,
    {
        Self { label: label.into(), value: Arc::new(value), gradient: None, base: None, map: None, endpoints: None }
    }

    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&Point) -> Result<Covector> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn with_base(mut self, base: Point) -> Self {
        self.base = Some(base);
        self
    }

    /// Attach the map this phase generates, bypassing the inversion of
    /// `dΦ(x) = H_x(γ(x̃))` in [`generated_map`].
    pub fn with_map(mut self, map: SymplecticMap) -> Self {
        self.map = Some(map);
        self
    }

    /// Attach `x ↦ (ℓ(x, dΦ(x)), r(x, dΦ(x)))` when it is known directly
    /// (chord end-points), bypassing the inversion of `H_x`.
    pub fn with_endpoints<F>(mut self, f: F) -> Self
    where
        F: Fn(&Point) -> Result<(Point, Point)> + Send + Sync + 'static,
    {
        self.endpoints = Some(Arc::new(f));
        self
    }

    pub fn endpoints(&self, x: &Point) -> Option<Result<(Point, Point)>> {
        self.endpoints.as_ref().map(|f| f(x))
    }

    pub fn constant(c: f64, dim: usize) -> Self {
        Self::new(format!("const {c}"), move |_| Ok(c)).with_gradient(move |_| Ok(Covector::zeros(dim)))
    }

    /// `Φ(z) = c + k·z`.
    pub fn linear(k: Covector, c: f64) -> Self {
        let k2 = k.clone();
        Self::new("linear", move |z| Ok(c + k.dot(z))).with_gradient(move |_| Ok(k2.clone()))
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &Point, h: f64) -> Result<Covector> {
        match &self.gradient {
            Some(g) => g(x),
            None => fd_gradient(&|w: &Point| self.value(w), x, h),
        }
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn attached_map(&self) -> Option<&SymplecticMap> {
        self.map.as_ref()
    }

    /// `k·Φ + c`; drops the attached map unless `k = 1`.
    pub fn affine(&self, k: f64, c: f64) -> Self {
        let v = self.value.clone();
        let mut out = Self::new(format!("{k}·{}+{c}", self.label), move |x| Ok(k * v(x)? + c));
        if let Some(g) = self.gradient.clone() {
            out.gradient = Some(Arc::new(move |x| Ok(g(x)? * k)));
        }
        if k == 1.0 {
            out.map = self.map.clone();
            out.endpoints = self.endpoints.clone();
        }
        out
    }
}

/// `H(z)` with integrator resolution.
#[derive(Clone)]
pub struct HamiltonianSystem {
    pub label: String,
    h: ScalarFn,
    gradient: Option<GradientFn>,
    /// RK4 steps per unit time; falls back to the fixture setting.
    pub steps_per_unit: Option<usize>,
}

impl fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSystem").field("label", &self.label).finish()
    }
}

impl HamiltonianSystem {
    pub fn new<F>(label: impl Into<String>, h: F) -> Self
    where
        F: Fn(&Point) -> Result<f64> + Send + Sync + 'static,
    {
        Self { label: label.into(), h: Arc::new(h), gradient: None, steps_per_unit: None }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&Point) -> Result<Covector> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_steps_per_unit(mut self, steps: usize) -> Self {
        self.steps_per_unit = Some(steps);
        self
    }

    /// `(q² + p²)/2` summed over pairs.
    pub fn harmonic_oscillator() -> Self {
        Self::new("harmonic_oscillator", |z| Ok(0.5 * z.norm_squared())).with_gradient(|z| Ok(z.clone()))
    }

    /// `½ zᵀSz + c·z` with `S` symmetrized.
    pub fn quadratic(s: Matrix, c: Covector) -> Self {
        let s = (&s + s.transpose()) * 0.5;
        let (s1, c1) = (s.clone(), c.clone());
        Self::new("quadratic", move |z| Ok(0.5 * z.dot(&(&s1 * z)) + c1.dot(z))).with_gradient(move |z| Ok(&s * z + &c))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const {c}"), move |_| Ok(c)).with_gradient(|z| Ok(Covector::zeros(z.len())))
    }

    /// Cubic polynomial in one pair from ten coefficients of
    /// `1, q, p, q², qp, p², q³, q²p, qp², p³`.
    pub fn polynomial(c: [f64; 10]) -> Self {
        Self::new("polynomial", move |z| {
            let (q, p) = (z[0], z[1]);
            let m = [1.0, q, p, q * q, q * p, p * p, q * q * q, q * q * p, q * p * p, p * p * p];
            Ok(c.iter().zip(m).map(|(a, b)| a * b).sum())
        })
        .with_gradient(move |z| {
            let (q, p) = (z[0], z[1]);
            let dq = c[1] + 2.0 * c[3] * q + c[4] * p + 3.0 * c[6] * q * q + 2.0 * c[7] * q * p + c[8] * p * p;
            let dp = c[2] + c[4] * q + 2.0 * c[5] * p + c[7] * q * q + 2.0 * c[8] * q * p + 3.0 * c[9] * p * p;
            Ok(Covector::from_vec(vec![dq, dp]))
        })
    }

    pub fn value(&self, z: &Point) -> Result<f64> {
        (self.h)(z)
    }

    pub fn gradient(&self, z: &Point, h: f64) -> Result<Covector> {
        match &self.gradient {
            Some(g) => g(z),
            None => fd_gradient(&|w: &Point| self.value(w), z, h),
        }
    }

    pub fn vector_field(&self, fix: &SymplecticFixture, z: &Point) -> Result<Covector> {
        Ok(fix.hamiltonian_vector(z, &self.gradient(z, fix.settings.h_fd)?))
    }

    fn steps_for(&self, fix: &SymplecticFixture, t: f64) -> usize {
        let per_unit = self.steps_per_unit.unwrap_or(fix.settings.flow_steps_per_unit).max(1);
        ((t.abs() * per_unit as f64).ceil() as usize).max(1)
    }
}

/// `γ^t_H(z)` by RK4.
pub fn flow(sys: &HamiltonianSystem, fix: &SymplecticFixture, z: &Point, t: f64) -> Result<Point> {
    fix.check_point(z, "flow")?;
    if t == 0.0 {
        return Ok(z.clone());
    }
    let field = |_s: f64, w: &Point| {
        fix.check_point(w, "flow trajectory")
            .map_err(|_| EtherError::Numeric { context: format!("flow left the chart at {:?}", w.as_slice()) })?;
        sys.vector_field(fix, w)
    };
    let end = integrate_endpoint(&field, z, 0.0, t, sys.steps_for(fix, t))?;
    fix.check_point(&end, "flow endpoint")?;
    Ok(end)
}

/// `γ^t_H` as a map, inverse `γ^{-t}_H`.
pub fn flow_map(sys: &HamiltonianSystem, fix: &SymplecticFixture, t: f64) -> SymplecticMap {
    let (s1, f1, s2, f2) = (sys.clone(), fix.clone(), sys.clone(), fix.clone());
    SymplecticMap::new(format!("flow[{}; t={t}]", sys.label), move |z| flow(&s1, &f1, z, t))
        .with_inverse(move |z| flow(&s2, &f2, z, -t))
}

/// Trajectory `τ ↦ γ^{τt}(z)` on `[0, 1]` with its exact tangent.
pub fn trajectory_curve(sys: &HamiltonianSystem, fix: &SymplecticFixture, z: &Point, t: f64) -> Curve {
    let (s1, f1, z1) = (sys.clone(), fix.clone(), z.clone());
    let (s2, f2, z2) = (sys.clone(), fix.clone(), z.clone());
    Curve::with_tangent(
        "trajectory",
        move |tau| flow(&s1, &f1, &z1, tau * t),
        move |tau| Ok(s2.vector_field(&f2, &flow(&s2, &f2, &z2, tau * t)?)? * t),
    )
}

/// Image of a curve under a map, tangent by the map's Jacobian.
pub fn mapped_curve(gamma: &SymplecticMap, c: &Curve, h: f64) -> Curve {
    let (g1, c1) = (gamma.clone(), c.clone());
    let (g2, c2) = (gamma.clone(), c.clone());
    Curve::with_tangent(
        format!("{}({})", gamma.label, c.label),
        move |tau| g1.apply(&c1.point(tau)?),
        move |tau| Ok(g2.jacobian(&c2.point(tau)?, h)? * c2.tangent(tau)?),
    )
}

/// Fixed point `x̃` of `s_x⁻¹∘γ`.
pub fn fixed_midpoint(e: &EtherStructure, gamma: &SymplecticMap, x: &Point) -> Result<Point> {
    e.fixture.check_point(x, "fixed_midpoint")?;
    let residual = |w: &Point| Ok(e.reflection_inverse(x, &gamma.apply(w)?)? - w);
    newton_solve(residual, x, &e.fixture.settings.newton()).map(|r| r.x).map_err(|err| match err {
        EtherError::NoConvergence { .. } | EtherError::Singular { .. } => EtherError::NotInDomain {
            context: format!("fixed_midpoint at {:?}: map too far from identity ({err})", x.as_slice()),
        },
        other => other,
    })
}

/// `dΦ^γ(x) = H_x(γ(x̃))`.
pub fn phase_gradient(e: &EtherStructure, gamma: &SymplecticMap, x: &Point) -> Result<Covector> {
    let xt = fixed_midpoint(e, gamma, x)?;
    e.hamiltonian(x, &gamma.apply(&xt)?)
}

/// Geodesic from `x̃` to `γ(x̃)` through `x`, as two halves.
fn side(e: &EtherStructure, x: &Point, xt: &Point, gxt: &Point) -> Result<[Curve; 2]> {
    e.geodesic_pieces(x, xt, gxt)
}

/// `Φ^γ_y(x)`: area of the four-sided membrane
/// `x̃ → ỹ → γ(ỹ) → γ(x̃) → x̃`.
pub fn normalized_phase(e: &EtherStructure, gamma: &SymplecticMap, x: &Point, y: &Point) -> Result<f64> {
    normalized_phase_along(e, gamma, x, y, None)
}

/// As [`normalized_phase`] with a caller-chosen connecting curve `c`
/// from `x̃` to `ỹ`.
pub fn normalized_phase_along(e: &EtherStructure, gamma: &SymplecticMap, x: &Point, y: &Point, c: Option<Curve>) -> Result<f64> {
    if (x - y).norm() == 0.0 {
        return Ok(0.0);
    }
    let xt = fixed_midpoint(e, gamma, x)?;
    let yt = fixed_midpoint(e, gamma, y)?;
    let (gxt, gyt) = (gamma.apply(&xt)?, gamma.apply(&yt)?);
    let c = c.unwrap_or_else(|| Curve::segment(xt.clone(), yt.clone()));
    let [y1, y2] = side(e, y, &yt, &gyt)?;
    let [x1, x2] = side(e, x, &xt, &gxt)?;
    let membrane = Membrane::new(vec![
        c.clone(),
        y1,
        y2,
        mapped_curve(gamma, &c, e.fixture.settings.h_fd).reversed(),
        x2.reversed(),
        x1.reversed(),
    ]);
    membrane.area(&e.fixture)
}

/// Phase function `x ↦ Φ^γ_y(x)` with its exact gradient and map attached.
pub fn phase_of_map(e: &EtherStructure, gamma: &SymplecticMap, y: &Point) -> PhaseFunction {
    let (e1, g1, y1) = (e.clone(), gamma.clone(), y.clone());
    let (e2, g2) = (e.clone(), gamma.clone());
    PhaseFunction::new(format!("Φ[{}]", gamma.label), move |x| normalized_phase(&e1, &g1, x, &y1))
        .with_gradient(move |x| phase_gradient(&e2, &g2, x))
        .with_base(y.clone())
        .with_map(gamma.clone())
}

/// Mid-point `x = γ̃(z)` solving `dΦ(x) = H_x(s_x(z))`, seeded at `z`.
pub fn mid_transformation(e: &EtherStructure, phi: &PhaseFunction, z: &Point) -> Result<Point> {
    let h = e.fixture.settings.h_fd;
    let residual = |x: &Point| Ok(phi.gradient(x, h)? - e.hamiltonian(x, &e.reflection(x, z)?)?);
    newton_solve(residual, z, &e.fixture.settings.newton()).map(|r| r.x).map_err(|err| match err {
        EtherError::NoConvergence { .. } | EtherError::Singular { .. } => EtherError::NotInDomain {
            context: format!("map_from_phase at {:?}: phase too far from constant ({err})", z.as_slice()),
        },
        other => other,
    })
}

/// `γ(z) = s_{γ̃(z)}(z)` for the map generated by `Φ`.
pub fn map_from_phase(e: &EtherStructure, phi: &PhaseFunction, z: &Point) -> Result<Point> {
    let x = mid_transformation(e, phi, z)?;
    e.reflection(&x, z)
}

/// The map generated by `Φ`: the attached one when present.
pub fn generated_map(e: &EtherStructure, phi: &PhaseFunction) -> SymplecticMap {
    if let Some(m) = phi.attached_map() {
        return m.clone();
    }
    let (e1, p1) = (e.clone(), phi.clone());
    SymplecticMap::new(format!("γ[{}]", phi.label), move |z| map_from_phase(&e1, &p1, z))
}

/// `Φ^γ_y(x) + Φ(y)` with `γ` generated by `Φ`; equals `Φ(x)`.
pub fn membrane_representation(e: &EtherStructure, phi: &PhaseFunction, x: &Point, y: &Point) -> Result<f64> {
    let gamma = generated_map(e, phi);
    Ok(normalized_phase(e, &gamma, x, y)? + phi.value(y)?)
}

/// `Φ^t(x) = ∫_{Σ^t(x)} ω - t H(x̃)`, membrane bounded by the trajectory
/// `x̃ → γ^t(x̃)` and the geodesic back through `x`.
pub fn dynamic_phase(e: &EtherStructure, sys: &HamiltonianSystem, x: &Point, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let gamma = flow_map(sys, &e.fixture, t);
    let xt = fixed_midpoint(e, &gamma, x)?;
    let gxt = gamma.apply(&xt)?;
    let [g1, g2] = side(e, x, &xt, &gxt)?;
    let membrane = Membrane::new(vec![trajectory_curve(sys, &e.fixture, &xt, t), g2.reversed(), g1.reversed()]);
    Ok(membrane.area(&e.fixture)? - t * sys.value(&xt)?)
}

/// Dynamic phase as a [`PhaseFunction`] with exact gradient and the flow attached.
pub fn dynamic_phase_function(e: &EtherStructure, sys: &HamiltonianSystem, t: f64) -> PhaseFunction {
    let gamma = flow_map(sys, &e.fixture, t);
    let (e1, s1) = (e.clone(), sys.clone());
    let (e2, g2) = (e.clone(), gamma.clone());
    PhaseFunction::new(format!("Φ^{t}[{}]", sys.label), move |x| dynamic_phase(&e1, &s1, x, t))
        .with_gradient(move |x| {
            if t == 0.0 {
                return Ok(Covector::zeros(x.len()));
            }
            phase_gradient(&e2, &g2, x)
        })
        .with_map(gamma)
}

/// Area of the membrane `w → z`, trajectory `z → γ^t z`, `γ^t(c)` back to
/// `γ^t w`, trajectory back to `w`; equals `t (H(z) - H(w))`.
pub fn poincare_cartan_area(e: &EtherStructure, sys: &HamiltonianSystem, z: &Point, w: &Point, t: f64) -> Result<f64> {
    let c = Curve::segment(w.clone(), z.clone());
    let gamma = flow_map(sys, &e.fixture, t);
    let membrane = Membrane::new(vec![
        c.clone(),
        trajectory_curve(sys, &e.fixture, z, t),
        mapped_curve(&gamma, &c, e.fixture.settings.h_fd).reversed(),
        trajectory_curve(sys, &e.fixture, w, t).reversed(),
    ]);
    membrane.area(&e.fixture)
}

/// Line integral of a covector field along the chart segment `y → x`.
pub fn integrate_gradient<F>(fix: &SymplecticFixture, grad: F, y: &Point, x: &Point) -> Result<f64>
where
    F: Fn(&Point) -> Result<Covector>,
{
    let d = x - y;
    let rule = crate::geometry::quadrature::gauss_legendre(fix.settings.quad_order);
    let panels = fix.settings.curve_panels.max(1);
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = h * (k as f64 + 0.5);
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            let p = y + &d * (mid + 0.5 * h * node);
            total += w * grad(&p)?.dot(&d);
        }
    }
    Ok(0.5 * h * total)
}

/// Max-norm of the antisymmetric part of the Jacobian of a covector field.
pub fn fd_curl<F>(grad: F, x: &Point, h: f64) -> Result<f64>
where
    F: Fn(&Point) -> Result<Covector>,
{
    let j = fd_jacobian(&grad, x, h)?;
    Ok((&j - j.transpose()).amax())
}

#[cfg(test)]
mod tests;
