//! Chart-level symplectic linear algebra and the numerical plumbing
//! (quadrature, root finding, RK4) that the rest of the crate builds on.
//!
//! Conventions, fixed once for the whole crate: on the standard plane with
//! coordinates `z = (q, p)` the form is `ω = dp∧dq`, i.e. the matrix
//! `[[0, -1], [1, 0]]`; `Ψ = ω⁻¹`; `{f, g} = ∇f · Ψ ∇g`; the Hamiltonian
//! vector field is `X_H = Ψᵀ ∇H` (so that `X_H f = {H, f}`).  Higher
//! dimensional standard charts interleave pairs `(q₁, p₁, q₂, p₂, …)`.

pub mod curve;
pub mod newton;
pub mod ode;
pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{EtherError, Result};

pub use curve::{curve_integral_theta, line_integral_theta, Curve, Membrane, Polyline};
pub use newton::{
    count_iterations, fd_gradient, fd_jacobian, newton_solve, newton_solve_with_jacobian, NewtonOptions, NewtonReport,
};
pub use ode::{integrate_endpoint, integrate_ode, rk4_step};

pub type Point = DVector<f64>;
pub type Covector = DVector<f64>;
pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

pub type MatrixField = Arc<dyn Fn(&Point) -> Matrix + Send + Sync>;
pub type CovectorField = Arc<dyn Fn(&Point) -> Covector + Send + Sync>;
pub type ScalarField<'a> = &'a dyn Fn(&Point) -> Result<f64>;

/// Solver and discretization knobs shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericSettings {
    pub tol_newton: f64,
    pub max_iter: usize,
    pub h_fd: f64,
    pub quad_order: usize,
    pub curve_panels: usize,
    pub ode_steps: usize,
    pub flow_steps_per_unit: usize,
}

impl Default for NumericSettings {
    fn default() -> Self {
        Self {
            tol_newton: 1e-11,
            max_iter: 50,
            h_fd: 1e-5,
            quad_order: 8,
            curve_panels: 4,
            ode_steps: 64,
            flow_steps_per_unit: 200,
        }
    }
}

impl NumericSettings {
    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions { tol: self.tol_newton, max_iter: self.max_iter, h_fd: self.h_fd }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.tol_newton, self.h_fd];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(EtherError::Parameter("tolerances must be positive".into()));
        }
        if self.max_iter == 0 || self.quad_order == 0 || self.curve_panels == 0 || self.ode_steps == 0 {
            return Err(EtherError::Parameter("iteration and step counts must be positive".into()));
        }
        if self.quad_order > quadrature::MAX_ORDER {
            return Err(EtherError::Parameter(format!("quadrature order above {}", quadrature::MAX_ORDER)));
        }
        Ok(())
    }
}

/// Axis-aligned chart box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self { lo: vec![-half_width; dim], hi: vec![half_width; dim] }
    }

    pub fn contains(&self, z: &Point) -> bool {
        z.len() == self.lo.len()
            && z.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (lo, hi))| v.is_finite() && *v >= *lo && *v <= *hi)
    }
}

/// A single chart with symplectic form `ω`, primitive `θ` (`dθ = ω`) and
/// Poisson tensor `Ψ = ω⁻¹`.
#[derive(Clone)]
pub struct SymplecticFixture {
    pub name: String,
    dim: usize,
    omega: MatrixField,
    theta: CovectorField,
    psi: Option<MatrixField>,
    pub domain: Domain,
    pub settings: NumericSettings,
}

impl fmt::Debug for SymplecticFixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymplecticFixture")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish()
    }
}

/// `[[0, -1], [1, 0]]` blocks along the diagonal.
pub fn standard_omega(dim: usize) -> Matrix {
    let mut m = Matrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        m[(2 * k, 2 * k + 1)] = -1.0;
        m[(2 * k + 1, 2 * k)] = 1.0;
    }
    m
}

impl SymplecticFixture {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        omega: MatrixField,
        theta: CovectorField,
        psi: Option<MatrixField>,
        domain: Domain,
    ) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(EtherError::Parameter(format!("chart dimension {dim} is not a positive even number")));
        }
        if domain.lo.len() != dim || domain.hi.len() != dim {
            return Err(EtherError::Dimension { expected: dim, got: domain.lo.len() });
        }
        Ok(Self { name: name.into(), dim, omega, theta, psi, domain, settings: NumericSettings::default() })
    }

    /// Standard chart of dimension `2n` with `θ = Σ pᵢ dqᵢ`.
    pub fn standard(n: usize, half_width: f64) -> Self {
        let dim = 2 * n;
        let omega = standard_omega(dim);
        let psi = omega.clone().try_inverse().expect("standard form is invertible");
        Self::new(
            "standard",
            dim,
            Arc::new(move |_| omega.clone()),
            Arc::new(move |z: &Point| {
                let mut t = Covector::zeros(z.len());
                for k in 0..z.len() / 2 {
                    t[2 * k] = z[2 * k + 1];
                }
                t
            }),
            Some(Arc::new(move |_| psi.clone())),
            Domain::cube(dim, half_width),
        )
        .expect("standard chart is well formed")
    }

    /// Stereographic chart of the unit sphere's upper hemisphere,
    /// `P(q, p) = (q, p, 1 - r²/4) / (1 + r²/4)`, with the area form
    /// `ω = dp∧dq / (1 + r²/4)²` and the rotation-invariant primitive
    /// `θ = 2 (p dq - q dp) / (4 + r²)`.
    pub fn sphere_chart(half_width: f64) -> Self {
        let conformal = |z: &Point| {
            let r2 = z[0] * z[0] + z[1] * z[1];
            1.0 / (1.0 + 0.25 * r2).powi(2)
        };
        Self::new(
            "sphere_chart",
            2,
            Arc::new(move |z: &Point| standard_omega(2) * conformal(z)),
            Arc::new(|z: &Point| {
                let r2 = z[0] * z[0] + z[1] * z[1];
                let h = 2.0 / (4.0 + r2);
                Covector::from_vec(vec![h * z[1], -h * z[0]])
            }),
            Some(Arc::new(move |z: &Point| standard_omega(2).transpose() / conformal(z))),
            Domain::cube(2, half_width),
        )
        .expect("sphere chart is well formed")
    }

    pub fn with_settings(mut self, settings: NumericSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self, z: &Point) -> Matrix {
        (self.omega)(z)
    }

    pub fn theta(&self, z: &Point) -> Covector {
        (self.theta)(z)
    }

    pub fn psi(&self, z: &Point) -> Matrix {
        match &self.psi {
            Some(p) => p(z),
            None => self.omega(z).try_inverse().unwrap_or_else(|| Matrix::from_element(self.dim, self.dim, f64::NAN)),
        }
    }

    pub fn check_point(&self, z: &Point, context: &str) -> Result<()> {
        if z.len() != self.dim {
            return Err(EtherError::Dimension { expected: self.dim, got: z.len() });
        }
        if !self.domain.contains(z) {
            return Err(EtherError::Domain { point: z.iter().copied().collect(), context: context.to_string() });
        }
        Ok(())
    }

    /// `X_H = Ψᵀ ∇H` at `z`.
    pub fn hamiltonian_vector(&self, z: &Point, grad: &Covector) -> Vector {
        self.psi(z).transpose() * grad
    }

    /// Exterior derivative of `θ` by central differences, as a matrix
    /// `dθ_ij = ∂_i θ_j - ∂_j θ_i`.
    pub fn fd_d_theta(&self, z: &Point) -> Result<Matrix> {
        let theta = |x: &Point| Ok(self.theta(x));
        let j = fd_jacobian(&theta, z, self.settings.h_fd)?;
        // j[(k, i)] = ∂_i θ_k
        Ok(j.transpose() - j)
    }
}

/// `{f, g}(z) = ∇f · Ψ(z) ∇g`, gradients by central differences.
pub fn poisson_bracket(fix: &SymplecticFixture, f: ScalarField<'_>, g: ScalarField<'_>, z: &Point) -> Result<f64> {
    fix.check_point(z, "poisson_bracket")?;
    let h = fix.settings.h_fd;
    let gf = fd_gradient(f, z, h)?;
    let gg = fd_gradient(g, z, h)?;
    if gf.iter().chain(gg.iter()).any(|v| !v.is_finite()) {
        return Err(EtherError::Numeric { context: "poisson_bracket gradient".into() });
    }
    Ok(gf.dot(&(fix.psi(z) * gg)))
}

/// Bracket of two covectors (already-computed gradients) at `z`.
pub fn bracket_of_gradients(fix: &SymplecticFixture, z: &Point, df: &Covector, dg: &Covector) -> f64 {
    df.dot(&(fix.psi(z) * dg))
}

pub fn point(v: &[f64]) -> Point {
    Point::from_column_slice(v)
}
