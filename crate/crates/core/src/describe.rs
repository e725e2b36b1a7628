//! Human-readable fixture summary.

use std::fmt::Write;

use crate::config::Tolerances;
use crate::error::Result;
use crate::ether::FixtureSpec;
use crate::geometry::{Matrix, Point};

fn matrix(m: &Matrix) -> String {
    let rows: Vec<String> =
        m.row_iter().map(|r| format!("[{}]", r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

/// Metadata, conventions and closed forms of a fixture.
pub fn describe_fixture(spec: &FixtureSpec, tol: &Tolerances) -> Result<String> {
    let e = spec.build(tol.settings())?;
    let origin = Point::zeros(e.dim());
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(s, "{k:<18} {v}");
    };
    line("fixture", e.name().to_string());
    line("dimension", e.dim().to_string());
    line("involutive", e.involutive().to_string());
    line(
        "chart",
        e.fixture.domain.lo.iter().zip(&e.fixture.domain.hi).map(|(a, b)| format!("[{a}, {b}]")).collect::<Vec<_>>().join(" × "),
    );
    line("validity radius", e.validity_radius.to_string());
    line("ω(0)", matrix(&e.fixture.omega(&origin)));
    line("Ψ(0) = ω(0)⁻¹", matrix(&e.fixture.psi(&origin)));
    line("coordinates", "z = (q₁..qₙ, p₁..pₙ), θ = Σ p dq".into());
    line("field sign", "X_H = Ψᵀ∇H (oscillator flows counter-clockwise)".into());
    line("membrane area", "−∮θ over the boundary loop".into());
    for (i, f) in e.describe().into_iter().enumerate() {
        line(if i == 0 { "closed forms" } else { "" }, f);
    }
    let n = tol.settings();
    line(
        "numerics",
        format!(
            "tol_newton {:e}, h_fd {:e}, quad_order {}, ode_steps {}, max_iter {}",
            n.tol_newton, n.h_fd, n.quad_order, n.ode_steps, n.max_iter
        ),
    );
    Ok(s)
}
