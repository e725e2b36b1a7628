//! Damped Newton iteration for square systems.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use crate::error::{EtherError, Result};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative step for the central-difference Jacobian.
    pub h_fd: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 50, h_fd: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Central-difference Jacobian of `f` at `x`, step scaled by `max(1, |x_i|)`.
pub fn fd_jacobian<F>(f: &F, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>> + ?Sized,
{
    let n = x.len();
    let mut jac: Option<DMatrix<f64>> = None;
    for j in 0..n {
        let step = h * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        let fp = f(&xp)?;
        let fm = f(&xm)?;
        let col = (fp - fm) / (2.0 * step);
        let m = jac.get_or_insert_with(|| DMatrix::zeros(col.len(), n));
        m.set_column(j, &col);
    }
    Ok(jac.unwrap_or_else(|| DMatrix::zeros(0, 0)))
}

/// Central-difference gradient of a scalar field.
pub fn fd_gradient<F>(f: &F, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64> + ?Sized,
{
    let mut g = DVector::zeros(x.len());
    for j in 0..x.len() {
        let step = h * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        g[j] = (f(&xp)? - f(&xm)?) / (2.0 * step);
    }
    Ok(g)
}

/// Solve `f(x) = 0` from `x0` with a finite-difference Jacobian.
pub fn newton_solve<F>(f: F, x0: &DVector<f64>, opts: &NewtonOptions) -> Result<NewtonReport>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let h = opts.h_fd;
    newton_solve_with_jacobian(&f, |x| fd_jacobian(&f, x, h), x0, opts)
}

thread_local! {
    static ITERATIONS: Cell<usize> = const { Cell::new(0) };
}

/// Runs `f` and returns the Newton iterations spent on this thread meanwhile.
pub fn count_iterations<T>(f: impl FnOnce() -> T) -> (T, usize) {
    let before = ITERATIONS.with(Cell::get);
    let out = f();
    (out, ITERATIONS.with(Cell::get) - before)
}

/// Solve `f(x) = 0` with a caller-supplied Jacobian.
pub fn newton_solve_with_jacobian<F, J>(f: F, jac: J, x0: &DVector<f64>, opts: &NewtonOptions) -> Result<NewtonReport>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
    J: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    let out = solve(f, jac, x0, opts);
    let spent = match &out {
        Ok(r) => r.iterations,
        Err(EtherError::NoConvergence { iterations, .. }) => *iterations,
        Err(_) => 0,
    };
    ITERATIONS.with(|c| c.set(c.get() + spent));
    out
}

fn solve<F, J>(f: F, jac: J, x0: &DVector<f64>, opts: &NewtonOptions) -> Result<NewtonReport>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
    J: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    let mut x = x0.clone();
    let mut fx = f(&x)?;
    if fx.len() != x.len() {
        return Err(EtherError::Dimension { expected: x.len(), got: fx.len() });
    }
    let mut norm = checked_norm(&fx)?;
    for iter in 0..opts.max_iter {
        if norm < opts.tol {
            return Ok(NewtonReport { x, iterations: iter, residual: norm });
        }
        let j = jac(&x)?;
        let step = j
            .clone()
            .lu()
            .solve(&(-&fx))
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .ok_or_else(|| EtherError::Singular { context: "newton".into() })?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &x + &step * alpha;
            if let Ok(ft) = f(&trial) {
                if let Ok(nt) = checked_norm(&ft) {
                    if nt < norm {
                        x = trial;
                        fx = ft;
                        norm = nt;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Noise floor of a nested or finite-difference residual.
            if norm < 1e3 * opts.tol {
                return Ok(NewtonReport { x, iterations: iter, residual: norm });
            }
            return Err(EtherError::NoConvergence {
                context: "newton line search stalled".into(),
                iterations: iter,
                residual: norm,
            });
        }
    }
    if norm < opts.tol {
        return Ok(NewtonReport { x, iterations: opts.max_iter, residual: norm });
    }
    Err(EtherError::NoConvergence { context: "newton".into(), iterations: opts.max_iter, residual: norm })
}

fn checked_norm(v: &DVector<f64>) -> Result<f64> {
    let n = v.norm();
    if n.is_finite() {
        Ok(n)
    } else {
        Err(EtherError::Numeric { context: "newton residual".into() })
    }
}
