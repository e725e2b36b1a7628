//! Paths in the chart and θ line integrals along them.
//!
//! A membrane is represented only by its boundary; its symplectic area is
//! the θ-integral around that boundary.  The sign is chosen so that the
//! area agrees with the orientation carried by the phase functions: the
//! area of a membrane is `-∮ θ` over its boundary as listed.

use std::fmt;
use std::sync::Arc;

use crate::error::{EtherError, Result};
use crate::geometry::quadrature::gauss_legendre;
use crate::geometry::{Point, SymplecticFixture, Vector};

/// Ordered vertices; `closed` joins the last vertex back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub vertices: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    pub fn open(vertices: Vec<Point>) -> Self {
        Self { vertices, closed: false }
    }

    pub fn closed(vertices: Vec<Point>) -> Self {
        Self { vertices, closed: true }
    }

    pub fn segments(&self) -> impl Iterator<Item = (&Point, &Point)> + '_ {
        let n = self.vertices.len();
        let extra = if self.closed && n > 1 { 1 } else { 0 };
        (0..(n.saturating_sub(1) + extra)).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    pub fn first(&self) -> Option<&Point> {
        self.vertices.first()
    }

    pub fn last(&self) -> Option<&Point> {
        self.vertices.last()
    }
}

/// `∫ θ` along a polyline, `quad_order` Gauss nodes per segment.
pub fn line_integral_theta(fix: &SymplecticFixture, path: &Polyline) -> Result<f64> {
    for v in &path.vertices {
        fix.check_point(v, "line_integral_theta")?;
    }
    let rule = gauss_legendre(fix.settings.quad_order);
    let mut total = 0.0;
    for (a, b) in path.segments() {
        let d = b - a;
        if d.norm() == 0.0 {
            continue;
        }
        let mid = (a + b) * 0.5;
        let mut seg = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let z = &mid + &d * (0.5 * x);
            seg += w * fix.theta(&z).dot(&d);
        }
        total += 0.5 * seg;
    }
    if !total.is_finite() {
        return Err(EtherError::Numeric { context: "line_integral_theta".into() });
    }
    Ok(total)
}

type PointFn = Arc<dyn Fn(f64) -> Result<Point> + Send + Sync>;
type TangentFn = Arc<dyn Fn(f64) -> Result<Vector> + Send + Sync>;

/// Smooth parametrized piece `τ ∈ [0, 1] ↦ c(τ)`.
#[derive(Clone)]
pub struct Curve {
    pub label: String,
    point: PointFn,
    tangent: Option<TangentFn>,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Curve").field("label", &self.label).finish()
    }
}

impl Curve {
    pub fn new<F>(label: impl Into<String>, point: F) -> Self
    where
        F: Fn(f64) -> Result<Point> + Send + Sync + 'static,
    {
        Self { label: label.into(), point: Arc::new(point), tangent: None }
    }

    pub fn with_tangent<F, T>(label: impl Into<String>, point: F, tangent: T) -> Self
    where
        F: Fn(f64) -> Result<Point> + Send + Sync + 'static,
        T: Fn(f64) -> Result<Vector> + Send + Sync + 'static,
    {
        Self { label: label.into(), point: Arc::new(point), tangent: Some(Arc::new(tangent)) }
    }

    pub fn segment(a: Point, b: Point) -> Self {
        let d = &b - &a;
        let dd = d.clone();
        Self::with_tangent("segment", move |t| Ok(&a + &d * t), move |_| Ok(dd.clone()))
    }

    pub fn point(&self, tau: f64) -> Result<Point> {
        (self.point)(tau)
    }

    pub fn tangent(&self, tau: f64) -> Result<Vector> {
        match &self.tangent {
            Some(t) => t(tau),
            None => {
                let h = 1e-5;
                let (lo, hi) = ((tau - h).max(0.0), (tau + h).min(1.0));
                if hi - lo < 1e-12 {
                    return Err(EtherError::Numeric { context: "curve tangent on a degenerate interval".into() });
                }
                let d = self.point(hi)? - self.point(lo)?;
                Ok(d / (hi - lo))
            }
        }
    }

    pub fn start(&self) -> Result<Point> {
        self.point(0.0)
    }

    pub fn end(&self) -> Result<Point> {
        self.point(1.0)
    }

    pub fn reversed(&self) -> Self {
        let p = self.point.clone();
        let t = self.tangent.clone();
        Self {
            label: format!("{} (reversed)", self.label),
            point: Arc::new(move |tau| p(1.0 - tau)),
            tangent: t.map(|t| -> TangentFn { Arc::new(move |tau| t(1.0 - tau).map(|v| -v)) }),
        }
    }

    /// Sample `n + 1` equally spaced points as a polyline.
    pub fn sample(&self, n: usize) -> Result<Polyline> {
        let n = n.max(1);
        let vertices = (0..=n).map(|k| self.point(k as f64 / n as f64)).collect::<Result<Vec<_>>>()?;
        Ok(Polyline::open(vertices))
    }
}

/// Composite Gauss–Legendre `∫ θ` along a parametrized curve.
pub fn curve_integral_theta(fix: &SymplecticFixture, curve: &Curve) -> Result<f64> {
    let panels = fix.settings.curve_panels.max(1);
    let rule = gauss_legendre(fix.settings.quad_order);
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = h * (k as f64 + 0.5);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let tau = mid + 0.5 * h * x;
            let z = curve.point(tau)?;
            let dz = curve.tangent(tau)?;
            total += w * fix.theta(&z).dot(&dz);
        }
    }
    let total = 0.5 * h * total;
    if !total.is_finite() {
        return Err(EtherError::Numeric { context: format!("θ-integral along {}", curve.label) });
    }
    Ok(total)
}

/// Closed boundary assembled from consecutive pieces.
#[derive(Debug, Clone, Default)]
pub struct Membrane {
    pub pieces: Vec<Curve>,
}

/// Largest tolerated mismatch between consecutive boundary pieces.
pub const MEMBRANE_GAP_TOL: f64 = 1e-6;

impl Membrane {
    pub fn new(pieces: Vec<Curve>) -> Self {
        Self { pieces }
    }

    pub fn push(&mut self, piece: Curve) {
        self.pieces.push(piece);
    }

    /// Largest distance between the end of one piece and the start of the next.
    pub fn closure_gap(&self) -> Result<f64> {
        let n = self.pieces.len();
        let mut gap: f64 = 0.0;
        for i in 0..n {
            let end = self.pieces[i].end()?;
            let start = self.pieces[(i + 1) % n].start()?;
            gap = gap.max((end - start).norm());
        }
        Ok(gap)
    }

    /// Symplectic area, `-∮ θ` over the boundary.
    pub fn area(&self, fix: &SymplecticFixture) -> Result<f64> {
        if self.pieces.is_empty() {
            return Ok(0.0);
        }
        let gap = self.closure_gap()?;
        if gap > MEMBRANE_GAP_TOL {
            return Err(EtherError::Numeric { context: format!("membrane boundary is not closed (gap {gap:.3e})") });
        }
        let mut total = 0.0;
        for piece in &self.pieces {
            total += curve_integral_theta(fix, piece)?;
        }
        Ok(-total)
    }
}
