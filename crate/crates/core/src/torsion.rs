//! Constant-coefficient internal Hamiltonians `H_x(z) = A(z - x)` with
//! `A = 2ω + diag(b, 0)` on the standard plane.  The inversions
//! `s_x(z) = x + N(z - x)` keep the fixed point but are not involutive
//! for `b ≠ 0`.

use std::sync::Arc;

use crate::error::{EtherError, Result};
use crate::ether::{EtherModel, EtherStructure};
use crate::geometry::{fd_gradient, standard_omega, Covector, Matrix, Point, Polyline, SymplecticFixture, Vector};
use crate::groupoid::{hj_residual, TimePhase};
use crate::phase_maps::{
    dynamic_phase, dynamic_phase_function, fd_curl, flow_map, integrate_gradient, normalized_phase, phase_gradient, phase_of_map,
    poincare_cartan_area, HamiltonianSystem, SymplecticMap,
};
use crate::phase_product::{phase_product, product_function, triangle_phase};

#[derive(Debug, Clone)]
pub struct TorsionConst {
    pub b: f64,
    pub a: Matrix,
    /// `M = (AΨ)ᵀ`, so that `∂_x s = M` and `Exp_x(v) = x + ½Mv`.
    pub m: Matrix,
    pub n: Matrix,
    pub n_inv: Matrix,
    m_inv: Matrix,
}

impl TorsionConst {
    pub fn new(b: f64) -> Result<Self> {
        if !b.is_finite() || b.abs() >= 2.0 {
            return Err(EtherError::Parameter(format!("torsion parameter b = {b} outside (-2, 2)")));
        }
        let omega = standard_omega(2);
        let psi = omega.clone().try_inverse().expect("standard form is invertible");
        let mut a = &omega * 2.0;
        a[(0, 0)] += b;
        if a.determinant().abs() < 1e-12 {
            return Err(EtherError::Parameter("degenerate internal Hamiltonian matrix".into()));
        }
        let m = (&a * psi).transpose();
        let n = Matrix::identity(2, 2) - &m;
        let n_inv = n.clone().try_inverse().ok_or_else(|| EtherError::Parameter("singular inversion".into()))?;
        let m_inv = m.clone().try_inverse().ok_or_else(|| EtherError::Parameter("singular exponential".into()))?;
        Ok(Self { b, a, m, n, n_inv, m_inv })
    }

    /// Algebraic zero-curvature defect `Bᵀ - B + BΨBᵀ` for `B = diag(b, 0)`.
    pub fn curvature_defect(&self) -> Matrix {
        let psi = standard_omega(2).try_inverse().expect("standard form is invertible");
        let mut bm = Matrix::zeros(2, 2);
        bm[(0, 0)] = self.b;
        bm.transpose() - &bm + &bm * psi * bm.transpose()
    }

    pub fn structure(self) -> EtherStructure {
        EtherStructure::new(SymplecticFixture::standard(1, 10.0), Arc::new(self), 8.0)
    }
}

impl EtherModel for TorsionConst {
    fn name(&self) -> &str {
        "torsion_const"
    }

    fn involutive(&self) -> bool {
        false
    }

    fn hamiltonian(&self, _fix: &SymplecticFixture, x: &Point, z: &Point) -> Result<Covector> {
        Ok(&self.a * (z - x))
    }

    fn hamiltonian_dz(&self, _fix: &SymplecticFixture, _x: &Point, _z: &Point) -> Option<Result<Matrix>> {
        Some(Ok(self.a.clone()))
    }

    fn reflection(&self, x: &Point, z: &Point) -> Option<Result<Point>> {
        Some(Ok(x + &self.n * (z - x)))
    }

    fn reflection_inverse(&self, x: &Point, z: &Point) -> Option<Result<Point>> {
        Some(Ok(x + &self.n_inv * (z - x)))
    }

    fn reflection_dx(&self, _x: &Point, _z: &Point) -> Option<Result<Matrix>> {
        Some(Ok(self.m.clone()))
    }

    fn exp(&self, x: &Point, v: &Vector) -> Option<Result<Point>> {
        Some(Ok(x + &self.m * v * 0.5))
    }

    fn log(&self, x: &Point, z: &Point) -> Option<Result<Vector>> {
        Some(Ok(&self.m_inv * (z - x) * 2.0))
    }

    fn describe(&self) -> Vec<String> {
        let row = |m: &Matrix, i: usize| format!("[{}, {}]", m[(i, 0)], m[(i, 1)]);
        vec![
            format!("A = 2ω + diag({}, 0) = [{}, {}]", self.b, row(&self.a, 0), row(&self.a, 1)),
            "H_x(z) = A(z - x)".into(),
            format!("s_x(z) = x + N(z - x), N = [{}, {}]", row(&self.n, 0), row(&self.n, 1)),
            format!("N⁻¹ = [{}, {}]", row(&self.n_inv, 0), row(&self.n_inv, 1)),
            "Exp_x(v) = x + ½ (AΨ)ᵀ v".into(),
            "involutive = false".into(),
        ]
    }
}

pub fn make_torsion_fixture(b: f64) -> Result<EtherStructure> {
    Ok(TorsionConst::new(b)?.structure())
}

/// Internal geodesic with center-point `x`: `σ⁺(τ) = Exp_x(τv)` joined to
/// `σ⁻ = s_x⁻¹(σ⁺)`, sampled with `segments` chords.
pub fn internal_geodesic(e: &EtherStructure, x: &Point, v: &Vector, segments: usize) -> Result<Polyline> {
    e.ether_geodesic(x, v, segments)
}

/// `‖s_x(s_x(z)) - z‖`, zero exactly for involutions.
pub fn involution_defect(e: &EtherStructure, x: &Point, z: &Point) -> Result<f64> {
    Ok((e.reflection(x, &e.reflection(x, z)?)? - z).norm())
}

/// One entry per identity: the largest residual, or the first failure.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub entries: Vec<(String, std::result::Result<f64, String>)>,
}

impl SuiteReport {
    fn record(&mut self, name: &str, r: Result<f64>) {
        self.entries.push((name.to_string(), r.map_err(|e| e.to_string())));
    }

    pub fn get(&self, name: &str) -> Option<&std::result::Result<f64, String>> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    /// Largest residual; failures count as infinite.
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|(_, r)| *r.as_ref().unwrap_or(&f64::INFINITY)).fold(0.0, f64::max)
    }
}

fn max_over<F>(points: &[Point], f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64>,
{
    (0..points.len()).try_fold(0.0f64, |m, i| Ok(m.max(f(i)?)))
}

/// Runs the membrane identities with center-points and internal geodesics:
/// normalized phase against the integrated gradient, closedness of the
/// gradient, the dynamic normalization identity, Poincaré–Cartan, the
/// triangle/translation identity, the product gradient and group laws and
/// the Hamilton–Jacobi residual.  `points` needs at least three entries.
pub fn torsion_phase_suite(
    e: &EtherStructure,
    gamma: &SymplecticMap,
    sys: &HamiltonianSystem,
    points: &[Point],
    t: f64,
) -> Result<SuiteReport> {
    if points.len() < 3 {
        return Err(EtherError::Parameter("suite needs at least three points".into()));
    }
    let next = |i: usize| &points[(i + 1) % points.len()];
    let third = |i: usize| &points[(i + 2) % points.len()];
    let mut rep = SuiteReport::default();

    rep.record(
        "membrane-gradient",
        max_over(points, |i| {
            let (x, y) = (&points[i], next(i));
            let m = normalized_phase(e, gamma, x, y)?;
            let g = integrate_gradient(&e.fixture, |w: &Point| phase_gradient(e, gamma, w), y, x)?;
            Ok((m - g).abs())
        }),
    );
    rep.record("gradient-closed", max_over(points, |i| fd_curl(|w: &Point| phase_gradient(e, gamma, w), &points[i], 1e-4)));
    let flow = flow_map(sys, &e.fixture, t);
    rep.record(
        "dynamic-normalization",
        max_over(points, |i| {
            let (x, y) = (&points[i], next(i));
            let lhs = normalized_phase(e, &flow, x, y)?;
            Ok((lhs - dynamic_phase(e, sys, x, t)? + dynamic_phase(e, sys, y, t)?).abs())
        }),
    );
    rep.record(
        "poincare-cartan",
        max_over(points, |i| {
            let (z, w) = (&points[i], next(i));
            let area = poincare_cartan_area(e, sys, z, w, t)?;
            Ok((area - t * (sys.value(z)? - sys.value(w)?)).abs())
        }),
    );
    rep.record(
        "triangle-translation",
        max_over(points, |i| {
            let (x, y, z) = (&points[i], next(i), third(i));
            let tri = triangle_phase(e, x, y, z)?;
            let (ee, yy, zz) = (e.clone(), y.clone(), z.clone());
            let g = SymplecticMap::new("g_yz", move |w: &Point| ee.reflection(&yy, &ee.reflection(&zz, w)?));
            Ok((tri - normalized_phase(e, &g, x, y)?).abs())
        }),
    );
    let phi = phase_of_map(e, gamma, &points[0]);
    let square = product_function(e, &phi, &phi);
    let twice = SymplecticMap::compose(gamma, gamma);
    rep.record(
        "product-gradient",
        max_over(points, |i| {
            let x = &points[i];
            let fd = fd_gradient(&|w: &Point| square.value(w), x, 1e-4)?;
            Ok((fd - phase_gradient(e, &twice, x)?).amax())
        }),
    );
    let (half, full) = (dynamic_phase_function(e, sys, t), dynamic_phase_function(e, sys, 2.0 * t));
    rep.record(
        "group-law",
        max_over(points, |i| {
            let x = &points[i];
            Ok((phase_product(e, &half, &half, x)? - full.value(x)?).abs())
        }),
    );
    let (e1, s1) = (e.clone(), sys.clone());
    let tp = TimePhase::new(move |x, t| dynamic_phase(&e1, &s1, x, t));
    rep.record("hamilton-jacobi", max_over(points, |i| hj_residual(e, sys, &tp, &points[i], t)));
    Ok(rep)
}
