//! Fixed-step classical Runge–Kutta integration.

use nalgebra::DVector;

use crate::error::{EtherError, Result};
use crate::geometry::Polyline;

/// One RK4 step of size `h` from `(t, x)`.
pub fn rk4_step<F>(field: &F, t: f64, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>> + ?Sized,
{
    let k1 = field(t, x)?;
    let k2 = field(t + 0.5 * h, &(x + &k1 * (0.5 * h)))?;
    let k3 = field(t + 0.5 * h, &(x + &k2 * (0.5 * h)))?;
    let k4 = field(t + h, &(x + &k3 * h))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Endpoint of the RK4 trajectory over `[t0, t1]` with `steps` steps.
pub fn integrate_endpoint<F>(field: &F, x0: &DVector<f64>, t0: f64, t1: f64, steps: usize) -> Result<DVector<f64>>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>> + ?Sized,
{
    let steps = steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let mut x = x0.clone();
    for k in 0..steps {
        let next = rk4_step(field, t0 + h * k as f64, &x, h)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(EtherError::Numeric {
                context: format!("ode state blew up at step {k}; last valid point {:?}", x.as_slice()),
            });
        }
        x = next;
    }
    Ok(x)
}

/// Full RK4 path, both endpoints included.
pub fn integrate_ode<F>(field: &F, x0: &DVector<f64>, span: (f64, f64), steps: usize) -> Result<Polyline>
where
    F: Fn(f64, &DVector<f64>) -> Result<DVector<f64>> + ?Sized,
{
    let steps = steps.max(1);
    let (t0, t1) = span;
    let h = (t1 - t0) / steps as f64;
    let mut vertices = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    vertices.push(x.clone());
    for k in 0..steps {
        let next = rk4_step(field, t0 + h * k as f64, &x, h)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(EtherError::Numeric {
                context: format!("ode state blew up at step {k}; last valid point {:?}", x.as_slice()),
            });
        }
        x = next;
        vertices.push(x.clone());
    }
    Ok(Polyline::open(vertices))
}
