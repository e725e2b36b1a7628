//! Ether (and internal) Hamiltonians, their reflections or inversions,
//! exponential maps, geodesics and mid-points.
//!
//! A structure is a [`SymplecticFixture`] together with an [`EtherModel`]
//! that supplies the two-point covector field `H_x(z)` and, when known,
//! closed forms for the derived objects.  Anything without a closed form is
//! computed numerically from `H` (the reflection from its dynamic equation,
//! `Exp` from the Hamiltonian flow of `½ v·H_x`).

pub mod fixtures;

use std::fmt;
use std::sync::Arc;

use crate::error::{EtherError, Result};
use crate::geometry::quadrature::gauss_legendre;
use crate::geometry::{
    fd_jacobian, integrate_endpoint, newton_solve, newton_solve_with_jacobian, Covector, Curve, Matrix, Point, Polyline,
    SymplecticFixture, Vector,
};

pub use fixtures::{FixtureSpec, FIXTURE_NAMES};

/// Source of an Ether (or internal) Hamiltonian and optional closed forms.
///
/// Index conventions: `hamiltonian_dz` returns `(D_z H)_{jk} = ∂H_j/∂z^k`;
/// `reflection_dx` returns `(∂s_x(z)/∂x)_{lj} = ∂s^l/∂x^j`.
pub trait EtherModel: Send + Sync {
    fn name(&self) -> &str;

    /// False for internal Hamiltonians whose inversions are not involutive.
    fn involutive(&self) -> bool {
        true
    }

    fn hamiltonian(&self, fix: &SymplecticFixture, x: &Point, z: &Point) -> Result<Covector>;

    fn hamiltonian_dz(&self, _fix: &SymplecticFixture, _x: &Point, _z: &Point) -> Option<Result<Matrix>> {
        None
    }

    fn reflection(&self, _x: &Point, _z: &Point) -> Option<Result<Point>> {
        None
    }

    fn reflection_inverse(&self, _x: &Point, _z: &Point) -> Option<Result<Point>> {
        None
    }

    fn reflection_dx(&self, _x: &Point, _z: &Point) -> Option<Result<Matrix>> {
        None
    }

    /// `Exp_x(v)`.
    fn exp(&self, _x: &Point, _v: &Vector) -> Option<Result<Point>> {
        None
    }

    fn log(&self, _x: &Point, _z: &Point) -> Option<Result<Vector>> {
        None
    }

    /// Human-readable closed forms, if any.
    fn describe(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Immutable Ether structure on a single chart.
#[derive(Clone)]
pub struct EtherStructure {
    pub fixture: SymplecticFixture,
    model: Arc<dyn EtherModel>,
    /// Solvers only operate within this distance of the diagonal.
    pub validity_radius: f64,
}

impl fmt::Debug for EtherStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EtherStructure")
            .field("fixture", &self.fixture)
            .field("model", &self.model.name())
            .field("involutive", &self.model.involutive())
            .field("validity_radius", &self.validity_radius)
            .finish()
    }
}

/// Christoffel symbols `Γ^l_{jk}` at a point, stored `[l][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTensor {
    pub dim: usize,
    pub gamma: Vec<f64>,
    /// Set when second differences fell below the finite-difference noise floor.
    pub noisy: bool,
}

impl ConnectionTensor {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, gamma: vec![0.0; dim * dim * dim], noisy: false }
    }

    pub fn get(&self, l: usize, j: usize, k: usize) -> f64 {
        self.gamma[(l * self.dim + j) * self.dim + k]
    }

    pub fn set(&mut self, l: usize, j: usize, k: usize, v: f64) {
        self.gamma[(l * self.dim + j) * self.dim + k] = v;
    }

    /// `T^l_{jk} = Γ^l_{jk} - Γ^l_{kj}`.
    pub fn torsion(&self, l: usize, j: usize, k: usize) -> f64 {
        self.get(l, j, k) - self.get(l, k, j)
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, other: &ConnectionTensor) -> f64 {
        self.gamma.iter().zip(&other.gamma).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl EtherStructure {
    pub fn new(fixture: SymplecticFixture, model: Arc<dyn EtherModel>, validity_radius: f64) -> Self {
        Self { fixture, model, validity_radius }
    }

    pub fn name(&self) -> &str {
        self.model.name()
    }

    pub fn model(&self) -> &dyn EtherModel {
        self.model.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.fixture.dim()
    }

    pub fn involutive(&self) -> bool {
        self.model.involutive()
    }

    pub fn describe(&self) -> Vec<String> {
        self.model.describe()
    }

    fn h_fd(&self) -> f64 {
        self.fixture.settings.h_fd
    }

    fn check_pair(&self, x: &Point, z: &Point, context: &str) -> Result<()> {
        self.fixture.check_point(x, context)?;
        self.fixture.check_point(z, context)?;
        if (z - x).norm() > self.validity_radius {
            return Err(EtherError::Domain {
                point: z.iter().copied().collect(),
                context: format!("{context}: outside validity radius {} of {:?}", self.validity_radius, x.as_slice()),
            });
        }
        Ok(())
    }

    /// `H_x(z)`.
    pub fn hamiltonian(&self, x: &Point, z: &Point) -> Result<Covector> {
        self.check_pair(x, z, "ether_eval")?;
        self.model.hamiltonian(&self.fixture, x, z)
    }

    /// `(D_z H_x(z))_{jk} = ∂H_j/∂z^k`.
    pub fn hamiltonian_dz(&self, x: &Point, z: &Point) -> Result<Matrix> {
        if let Some(m) = self.model.hamiltonian_dz(&self.fixture, x, z) {
            self.check_pair(x, z, "ether_dz")?;
            return m;
        }
        let f = |w: &Point| self.hamiltonian(x, w);
        fd_jacobian(&f, z, self.h_fd())
    }

    /// `(∂_x H_x(z))_{ji} = ∂H_j/∂x^i` by central differences.
    pub fn hamiltonian_dx(&self, x: &Point, z: &Point) -> Result<Matrix> {
        let f = |y: &Point| self.hamiltonian(y, z);
        fd_jacobian(&f, x, self.h_fd())
    }

    /// Max-norm of the 2-form `∂_x H + ½{H ∧ H}` at `(x, z)`.
    pub fn zero_curvature_residual(&self, x: &Point, z: &Point) -> Result<f64> {
        let dx = self.hamiltonian_dx(x, z)?;
        let dz = self.hamiltonian_dz(x, z)?;
        let curl = dx.transpose() - &dx;
        let brackets = &dz * self.fixture.psi(z) * dz.transpose();
        Ok((curl + brackets).amax())
    }

    /// Velocity field of the dynamic equation `∂s/∂x = DH_x(s) Ψ(s)`
    /// contracted with the direction `dx`.
    fn reflection_rate(&self, x: &Point, s: &Point, dx: &Vector) -> Result<Vector> {
        let dz = self.hamiltonian_dz(x, s)?;
        Ok((dz * self.fixture.psi(s)).transpose() * dx)
    }

    /// `s_x(z)` by integrating the dynamic equation along the chart path
    /// `z → via → x` (straight segments).
    pub fn integrate_reflection(&self, x: &Point, z: &Point, via: Option<&Point>) -> Result<Point> {
        let steps = self.fixture.settings.ode_steps;
        let mut legs: Vec<(Point, Point)> = Vec::new();
        match via {
            Some(w) => {
                legs.push((z.clone(), w.clone()));
                legs.push((w.clone(), x.clone()));
            }
            None => legs.push((z.clone(), x.clone())),
        }
        let mut s = z.clone();
        for (a, b) in legs {
            let d = &b - &a;
            if d.norm() == 0.0 {
                continue;
            }
            let field = |tau: f64, s: &Point| {
                let xt = &a + &d * tau;
                self.reflection_rate(&xt, s, &d)
            };
            s = integrate_endpoint(&field, &s, 0.0, 1.0, steps)?;
        }
        Ok(s)
    }

    /// `s_x(z)`: closed form when the model has one, otherwise integrated.
    pub fn reflection(&self, x: &Point, z: &Point) -> Result<Point> {
        self.check_pair(x, z, "reflection")?;
        if let Some(s) = self.model.reflection(x, z) {
            return s;
        }
        self.integrate_reflection(x, z, None)
    }

    /// `s_x⁻¹(z)`; equals [`reflection`](Self::reflection) for involutive structures.
    pub fn reflection_inverse(&self, x: &Point, z: &Point) -> Result<Point> {
        if self.involutive() {
            return self.reflection(x, z);
        }
        self.check_pair(x, z, "reflection_inverse")?;
        if let Some(s) = self.model.reflection_inverse(x, z) {
            return s;
        }
        let seed = x * 2.0 - z;
        newton_solve(|w| Ok(self.reflection(x, w)? - z), &seed, &self.fixture.settings.newton())
            .map(|r| r.x)
            .map_err(|e| e.at_stage("reflection_inverse"))
    }

    /// `∂s_x(z)/∂x`, closed form or central differences.
    pub fn reflection_dx(&self, x: &Point, z: &Point) -> Result<Matrix> {
        if let Some(m) = self.model.reflection_dx(x, z) {
            return m;
        }
        let f = |y: &Point| self.reflection(y, z);
        fd_jacobian(&f, x, self.h_fd())
    }

    /// `D_z s_x(z)` by central differences.
    pub fn reflection_dz(&self, x: &Point, z: &Point) -> Result<Matrix> {
        let f = |w: &Point| self.reflection(x, w);
        fd_jacobian(&f, z, self.h_fd())
    }

    /// Hamiltonian vector field of `w ↦ ½ v·H_x(w)`.
    pub fn exp_field(&self, x: &Point, v: &Vector, w: &Point) -> Result<Vector> {
        let dz = self.hamiltonian_dz(x, w)?;
        Ok((dz * self.fixture.psi(w)).transpose() * v * 0.5)
    }

    /// `Exp_x(v t)`.
    pub fn exp_map(&self, x: &Point, v: &Vector, t: f64) -> Result<Point> {
        let vt = v * t;
        if vt.norm() == 0.0 {
            return Ok(x.clone());
        }
        if let Some(e) = self.model.exp(x, &vt) {
            let e = e?;
            self.fixture.check_point(&e, "exp_map")?;
            return Ok(e);
        }
        let length = vt.norm();
        let steps = ((self.fixture.settings.ode_steps as f64) * (2.0 * length).max(0.25)).ceil() as usize;
        let field = |_t: f64, w: &Point| self.exp_field(x, &vt, w);
        integrate_endpoint(&field, x, 0.0, 1.0, steps)
    }

    /// `v` with `Exp_x(v) = z`, by Newton shooting from `z - x`.
    pub fn log_map(&self, x: &Point, z: &Point) -> Result<Vector> {
        if (z - x).norm() == 0.0 {
            return Ok(Vector::zeros(x.len()));
        }
        if let Some(l) = self.model.log(x, z) {
            return l;
        }
        let seed = z - x;
        newton_solve(|v| Ok(self.exp_map(x, v, 1.0)? - z), &seed, &self.fixture.settings.newton())
            .map(|r| r.x)
            .map_err(|e| e.at_stage("log_map"))
    }

    /// Mid-point (center-point) `x` with `s_x(b) = a`.
    pub fn midpoint(&self, a: &Point, b: &Point) -> Result<Point> {
        if (a - b).norm() == 0.0 {
            return Ok(a.clone());
        }
        let seed = (a + b) * 0.5;
        newton_solve_with_jacobian(
            |x| Ok(self.reflection(x, b)? - a),
            |x| self.reflection_dx(x, b),
            &seed,
            &self.fixture.settings.newton(),
        )
        .map(|r| r.x)
        .map_err(|e| e.at_stage("midpoint"))
    }

    /// Geodesic from `from` to `to` through the center `x`, where
    /// `s_x(from) = to`.  Returned as the two halves `from → x` and `x → to`
    /// so that quadrature never straddles the junction.
    pub fn geodesic_pieces(&self, x: &Point, from: &Point, to: &Point) -> Result<[Curve; 2]> {
        let v = self.log_map(x, to)?;
        let forward = {
            let me = self.clone();
            let x = x.clone();
            let v = v.clone();
            Curve::new("geodesic+", move |tau| me.exp_map(&x, &v, tau))
        };
        let backward = if self.involutive() {
            let me = self.clone();
            let x = x.clone();
            let v = v.clone();
            Curve::new("geodesic-", move |tau| me.exp_map(&x, &v, -(1.0 - tau)))
        } else {
            let me = self.clone();
            let x = x.clone();
            let v = v.clone();
            Curve::new("geodesic-", move |tau| {
                let w = me.exp_map(&x, &v, 1.0 - tau)?;
                me.reflection_inverse(&x, &w)
            })
        };
        let start = backward.start()?;
        if (&start - from).norm() > 1e-6 {
            return Err(EtherError::Numeric {
                context: format!("geodesic through {:?} misses its start point by {:.3e}", x.as_slice(), (&start - from).norm()),
            });
        }
        Ok([backward, forward])
    }

    /// Sampled geodesic `{Exp_x(vt)}` through `x`: from `Exp_x(-v)` (or
    /// `s_x⁻¹(Exp_x(v))` without involutivity) to `Exp_x(v)`.
    pub fn ether_geodesic(&self, x: &Point, v: &Vector, segments: usize) -> Result<Polyline> {
        if v.norm() == 0.0 {
            return Ok(Polyline::open(vec![x.clone()]));
        }
        let z = self.exp_map(x, v, 1.0)?;
        let y = self.reflection_inverse(x, &z)?;
        let [back, fwd] = self.geodesic_pieces(x, &y, &z)?;
        let half = segments.div_ceil(2).max(1);
        let mut vertices = back.sample(half)?.vertices;
        vertices.pop();
        vertices.extend(fwd.sample(half)?.vertices);
        Ok(Polyline::open(vertices))
    }

    /// `g_{x,y}(z) = s_x(s_y(z))`.
    pub fn translation(&self, x: &Point, y: &Point, z: &Point) -> Result<Point> {
        let w = self.reflection(y, z)?;
        self.reflection(x, &w)
    }

    /// Christoffel symbols generated by the reflection family at `x`.
    pub fn connection(&self, x: &Point) -> Result<ConnectionTensor> {
        connection_from_family(self, x)
    }
}

type FamilyFn = Arc<dyn Fn(&Point, &Point) -> Result<Point> + Send + Sync>;
type FamilyDx = Arc<dyn Fn(&Point, &Point) -> Result<Matrix> + Send + Sync>;

/// A smooth family `x ↦ s_x` of symplectic maps with `s_x(x) = x`.
#[derive(Clone)]
pub struct ReflectionFamily {
    pub reflect: FamilyFn,
    pub inverse: Option<FamilyFn>,
    pub dx: Option<FamilyDx>,
}

impl ReflectionFamily {
    pub fn new(reflect: FamilyFn) -> Self {
        Self { reflect, inverse: None, dx: None }
    }

    fn inverse_at(&self, x: &Point, w: &Point) -> Result<Point> {
        match &self.inverse {
            Some(inv) => inv(x, w),
            None => (self.reflect)(x, w),
        }
    }

    fn dx_at(&self, x: &Point, z: &Point, h: f64) -> Result<Matrix> {
        match &self.dx {
            Some(d) => d(x, z),
            None => {
                let f = |y: &Point| (self.reflect)(y, z);
                fd_jacobian(&f, x, h)
            }
        }
    }
}

/// `H_x(z) = ∫_x^z ⟨∂s_x(s_x⁻¹(w)), ω(w) dw⟩` along the straight chart
/// segment, `∂` being the derivative in the subscript.
pub fn ether_from_reflections(fix: &SymplecticFixture, family: &ReflectionFamily, x: &Point, z: &Point) -> Result<Covector> {
    let d = z - x;
    let n = x.len();
    if d.norm() == 0.0 {
        return Ok(Covector::zeros(n));
    }
    let panels = fix.settings.curve_panels.max(1);
    let rule = gauss_legendre(fix.settings.quad_order);
    let h = 1.0 / panels as f64;
    let mut acc = Covector::zeros(n);
    for k in 0..panels {
        let mid = h * (k as f64 + 0.5);
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            let tau = mid + 0.5 * h * node;
            let pt = x + &d * tau;
            let pre = family.inverse_at(x, &pt)?;
            let ds = family.dx_at(x, &pre, fix.settings.h_fd)?;
            // row j: Σ_l ∂_j s^l ω_lm d^m
            let omega_d = fix.omega(&pt) * &d;
            acc += ds.transpose() * omega_d * *w;
        }
    }
    Ok(acc * (0.5 * h))
}

/// Christoffel symbols of the connection generated by the reflections.
///
/// Involutive structures use `Γ(x) = -½ D²s_x(z)|_{z=x}`; otherwise the
/// general formula with the mixed second derivative and both inverse
/// Jacobians of `s` at the diagonal.
pub fn connection_from_family(e: &EtherStructure, x: &Point) -> Result<ConnectionTensor> {
    let n = x.len();
    let h = (e.fixture.settings.h_fd * 10.0).max(1e-4);
    let s = |y: &Point, z: &Point| e.reflection(y, z);
    let mut out = ConnectionTensor::zeros(n);
    let unit = |k: usize| {
        let mut u = Vector::zeros(n);
        u[k] = h;
        u
    };
    if e.involutive() {
        for j in 0..n {
            for k in j..n {
                let (uj, uk) = (unit(j), unit(k));
                let d2 = (s(x, &(x + &uj + &uk))? - s(x, &(x + &uj - &uk))? - s(x, &(x - &uj + &uk))? + s(x, &(x - &uj - &uk))?)
                    / (4.0 * h * h);
                for l in 0..n {
                    out.set(l, j, k, -0.5 * d2[l]);
                    out.set(l, k, j, -0.5 * d2[l]);
                }
            }
        }
    } else {
        let dz = e.reflection_dz(x, x)?;
        let dxm = e.reflection_dx(x, x)?;
        let dz_inv = dz.try_inverse().ok_or_else(|| EtherError::Singular { context: "connection: D_z s".into() })?;
        let dx_inv = dxm.try_inverse().ok_or_else(|| EtherError::Singular { context: "connection: ∂_x s".into() })?;
        // mixed[l][m][r] = ∂²s^l / ∂z^m ∂x^r
        let mut mixed = vec![0.0; n * n * n];
        for m in 0..n {
            for r in 0..n {
                let (um, ur) = (unit(m), unit(r));
                let d2 = (s(&(x + &ur), &(x + &um))? - s(&(x + &ur), &(x - &um))? - s(&(x - &ur), &(x + &um))?
                    + s(&(x - &ur), &(x - &um))?)
                    / (4.0 * h * h);
                for l in 0..n {
                    mixed[(l * n + m) * n + r] = d2[l];
                }
            }
        }
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        for r in 0..n {
                            acc += mixed[(l * n + m) * n + r] * dz_inv[(m, k)] * dx_inv[(r, j)];
                        }
                    }
                    out.set(l, j, k, -acc);
                }
            }
        }
    }
    // Second differences of O(1) maps carry roughly ε/h² of rounding.
    out.noisy = out.max_abs() > 0.0 && out.max_abs() < 1e-16 / (h * h);
    Ok(out)
}

/// Residual of covariant constancy of `ω` under `Γ`:
/// `∂_k ω_ij - Γ^m_{ki} ω_mj - Γ^m_{kj} ω_im`.
pub fn symplectic_connection_residual(fix: &SymplecticFixture, gamma: &ConnectionTensor, x: &Point) -> Result<f64> {
    let n = x.len();
    let h = fix.settings.h_fd;
    let w = fix.omega(x);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let mut u = Vector::zeros(n);
        u[k] = h;
        let dw = (fix.omega(&(x + &u)) - fix.omega(&(x - &u))) / (2.0 * h);
        for i in 0..n {
            for j in 0..n {
                let mut r = dw[(i, j)];
                for m in 0..n {
                    r -= gamma.get(m, k, i) * w[(m, j)] + gamma.get(m, k, j) * w[(i, m)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

/// Symplecticity defect `‖Jᵀ ω(f(z)) J - ω(z)‖_max` of a point map.
pub fn symplectic_defect<F>(fix: &SymplecticFixture, f: F, z: &Point) -> Result<f64>
where
    F: Fn(&Point) -> Result<Point>,
{
    let image = f(z)?;
    let j = fd_jacobian(&f, z, fix.settings.h_fd)?;
    Ok((j.transpose() * fix.omega(&image) * &j - fix.omega(z)).amax())
}
