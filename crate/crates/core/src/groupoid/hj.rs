//! Residual of the Hamilton–Jacobi equation `∂_tΦ + H(ℓ(x, d_xΦ)) = 0`.

use std::sync::Arc;

use crate::error::Result;
use crate::ether::EtherStructure;
use crate::geometry::{fd_gradient, Covector, Point};
use crate::groupoid::{left_map, GroupoidElement};
use crate::phase_maps::HamiltonianSystem;

type ValueFn = Arc<dyn Fn(&Point, f64) -> Result<f64> + Send + Sync>;
type GradFn = Arc<dyn Fn(&Point, f64) -> Result<Covector> + Send + Sync>;

/// Time-dependent phase `Φ(x, t)`.
#[derive(Clone)]
pub struct TimePhase {
    value: ValueFn,
    gradient: Option<GradFn>,
}

impl TimePhase {
    pub fn new<F>(value: F) -> Self
    where
        F: Fn(&Point, f64) -> Result<f64> + Send + Sync + 'static,
    {
        Self { value: Arc::new(value), gradient: None }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&Point, f64) -> Result<Covector> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn value(&self, x: &Point, t: f64) -> Result<f64> {
        (self.value)(x, t)
    }

    pub fn gradient(&self, x: &Point, t: f64, h: f64) -> Result<Covector> {
        match &self.gradient {
            Some(g) => g(x, t),
            None => fd_gradient(&|w: &Point| self.value(w, t), x, h),
        }
    }
}

/// Step of the central time difference.
pub const HJ_TIME_STEP: f64 = 1e-4;

pub fn hj_residual(e: &EtherStructure, sys: &HamiltonianSystem, phi: &TimePhase, x: &Point, t: f64) -> Result<f64> {
    let ht = HJ_TIME_STEP * t.abs().max(1.0);
    let dt = (phi.value(x, t + ht)? - phi.value(x, t - ht)?) / (2.0 * ht);
    let p = phi.gradient(x, t, e.fixture.settings.h_fd)?;
    let l = left_map(e, &GroupoidElement::new(x.clone(), p))?;
    Ok((dt + sys.value(&l)?).abs())
}
