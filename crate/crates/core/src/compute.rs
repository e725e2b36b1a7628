//! Grid sweeps of single quantities over the first canonical pair.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, Format, HamiltonianSpec, RunConfig};
use crate::error::{EtherError, Result};
use crate::ether::EtherStructure;
use crate::geometry::{count_iterations, point, Point};
use crate::groupoid::{
    chord_phase, hj_residual, left_map, lie_engel_residual, right_map, GroupoidElement, LagrangianCurve, TimePhase,
};
use crate::phase_maps::{dynamic_phase, dynamic_phase_function, HamiltonianSystem};
use crate::phase_product::{phase_product, triangle_phase};
use crate::torsion::involution_defect;
use crate::verify::csv_field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub q: f64,
    pub p: f64,
    /// NaN for every column when the point failed.
    pub values: Vec<f64>,
    /// Newton iterations spent on the point.
    pub iterations: usize,
    pub status: RowStatus,
    /// Error code of a failed point.
    pub reason: Option<String>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub experiment: Experiment,
    pub fixture: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl HamiltonianSpec {
    pub fn system(&self) -> HamiltonianSystem {
        match self {
            HamiltonianSpec::Oscillator => HamiltonianSystem::harmonic_oscillator(),
            HamiltonianSpec::Polynomial { coefficients } => HamiltonianSystem::polynomial(*coefficients),
        }
    }
}

fn columns(ex: Experiment) -> Result<(Vec<&'static str>, &'static str)> {
    Ok(match ex {
        Experiment::Phase => (vec!["phase"], "dynamic phase of params.hamiltonian at time params.t"),
        Experiment::Triangle => (vec!["phase"], "triangle phase with mid-points x (grid), params.y, params.z"),
        Experiment::Product => (
            vec!["product", "group_law_residual"],
            "dynamic phase at t/2 multiplied with itself, and its distance from the phase at t",
        ),
        Experiment::Chord => (vec!["phase"], "chord phase of the circle params.circle_center, params.circle_radius"),
        Experiment::Groupoid => (
            vec!["left_q", "left_p", "right_q", "right_p", "lie_engel"],
            "left/right images of (x, params.momentum) and the Lie-Engel residual there",
        ),
        Experiment::Torsion => (
            vec!["phase", "involution_defect"],
            "dynamic phase at params.t and the involution defect of s_x at x + params.momentum",
        ),
        Experiment::Hj => (vec!["phase", "hj_residual"], "dynamic phase at params.t and its Hamilton-Jacobi residual"),
        Experiment::Verify => {
            return Err(EtherError::Parameter(
                "experiment `verify` has no grid table; choose phase, triangle, product, chord, groupoid, torsion or hj".into(),
            ))
        }
    })
}

/// Grid point embedded at the first canonical pair, zero elsewhere.
fn embed(e: &EtherStructure, q: f64, p: f64) -> Point {
    let n = e.dim() / 2;
    let mut x = Point::zeros(e.dim());
    x[0] = q;
    x[n] = p;
    x
}

fn embed_pair(e: &EtherStructure, v: [f64; 2]) -> Point {
    embed(e, v[0], v[1])
}

fn two_d(e: &EtherStructure, what: &str) -> Result<()> {
    if e.dim() == 2 {
        Ok(())
    } else {
        Err(EtherError::Parameter(format!("{what} needs a two-dimensional fixture")))
    }
}

fn evaluate(e: &EtherStructure, cfg: &RunConfig, x: &Point) -> Result<Vec<f64>> {
    let par = &cfg.params;
    let sys = par.hamiltonian.system();
    match cfg.experiment {
        Experiment::Phase => Ok(vec![dynamic_phase(e, &sys, x, par.t)?]),
        Experiment::Triangle => Ok(vec![triangle_phase(e, x, &embed_pair(e, par.y), &embed_pair(e, par.z))?]),
        Experiment::Product => {
            let half = dynamic_phase_function(e, &sys, 0.5 * par.t);
            let v = phase_product(e, &half, &half, x)?;
            Ok(vec![v, (v - dynamic_phase(e, &sys, x, par.t)?).abs()])
        }
        Experiment::Chord => {
            let lam = LagrangianCurve::circle(point(&par.circle_center), par.circle_radius);
            Ok(vec![chord_phase(e, &lam, x)?])
        }
        Experiment::Groupoid => {
            let n = e.dim() / 2;
            let m = GroupoidElement::new(x.clone(), embed_pair(e, par.momentum));
            let (l, r) = (left_map(e, &m)?, right_map(e, &m)?);
            Ok(vec![l[0], l[n], r[0], r[n], lie_engel_residual(e, &m)?])
        }
        Experiment::Torsion => {
            let z = x + embed_pair(e, par.momentum);
            Ok(vec![dynamic_phase(e, &sys, x, par.t)?, involution_defect(e, x, &z)?])
        }
        Experiment::Hj => {
            let (e1, s1) = (e.clone(), sys.clone());
            let phi = TimePhase::new(move |w, t| dynamic_phase(&e1, &s1, w, t));
            Ok(vec![phi.value(x, par.t)?, hj_residual(e, &sys, &phi, x, par.t)?])
        }
        Experiment::Verify => unreachable!("rejected by columns()"),
    }
}

/// Builds the fixture from `cfg` and sweeps its grid.
pub fn run_compute(cfg: &RunConfig) -> Result<Table> {
    let e = cfg.build_fixture()?;
    compute_on(&e, cfg)
}

pub fn compute_on(e: &EtherStructure, cfg: &RunConfig) -> Result<Table> {
    let (cols, _) = columns(cfg.experiment)?;
    if cfg.experiment == Experiment::Chord {
        two_d(e, "the chord experiment")?;
        if !(cfg.params.circle_radius.is_finite() && cfg.params.circle_radius > 0.0) {
            return Err(EtherError::Parameter("params.circle_radius must be positive".into()));
        }
    }
    let width = cols.len();
    let rows = cfg
        .grid
        .points()
        .into_par_iter()
        .map(|(q, p)| {
            let x = embed(e, q, p);
            let (out, iterations) = count_iterations(|| evaluate(e, cfg, &x));
            match out {
                Ok(values) => Row { q, p, values, iterations, status: RowStatus::Ok, reason: None, detail: None },
                Err(err) => Row {
                    q,
                    p,
                    values: vec![f64::NAN; width],
                    iterations,
                    status: RowStatus::Failed,
                    reason: Some(err.code().to_string()),
                    detail: Some(err.to_string()),
                },
            }
        })
        .collect();
    Ok(Table { experiment: cfg.experiment, fixture: e.name().to_string(), columns: cols, rows })
}

impl Table {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::Failed).count()
    }

    pub fn write<W: Write + ?Sized>(&self, out: &mut W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                let (_, what) = columns(self.experiment).map_err(std::io::Error::other)?;
                let experiment = serde_json::to_value(self.experiment).map_err(std::io::Error::other)?;
                writeln!(out, "# etherphase compute")?;
                writeln!(out, "# experiment: {}", experiment.as_str().unwrap_or("?"))?;
                writeln!(out, "# fixture: {}", self.fixture)?;
                writeln!(out, "# q, p: grid point (first canonical pair, other coordinates 0)")?;
                writeln!(out, "# {}: {what}", self.columns.join(", "))?;
                writeln!(out, "# iterations: Newton iterations spent on the point")?;
                writeln!(out, "# status: ok | failed; failed rows carry NaN values, a reason code and a message")?;
                writeln!(out, "q,p,{},iterations,status,reason,detail", self.columns.join(","))?;
                for r in &self.rows {
                    let values: Vec<String> = r.values.iter().map(|v| format!("{v:.15e}")).collect();
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        r.q,
                        r.p,
                        values.join(","),
                        r.iterations,
                        if r.status == RowStatus::Ok { "ok" } else { "failed" },
                        r.reason.as_deref().unwrap_or(""),
                        csv_field(r.detail.as_deref().unwrap_or(""))
                    )?;
                }
            }
            Format::Jsonl => {
                for r in &self.rows {
                    let mut v = serde_json::json!({
                        "fixture": self.fixture,
                        "experiment": self.experiment,
                        "q": r.q,
                        "p": r.p,
                        "iterations": r.iterations,
                        "status": r.status,
                        "reason": r.reason,
                        "detail": r.detail,
                    });
                    for (c, x) in self.columns.iter().zip(&r.values) {
                        // JSON has no NaN; failed values become null.
                        v[*c] = if x.is_finite() { (*x).into() } else { serde_json::Value::Null };
                    }
                    writeln!(out, "{v}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Grid;
    use crate::ether::FixtureSpec;

    fn cfg(ex: Experiment) -> RunConfig {
        RunConfig { experiment: ex, ..RunConfig::default() }
    }

    #[test]
    fn chord_grid_on_unit_circle() {
        let t = run_compute(&cfg(Experiment::Chord)).unwrap();
        assert_eq!(t.rows.len(), 441);
        let centre = t.rows.iter().find(|r| r.q == 0.0 && r.p == 0.0).unwrap();
        assert_eq!(centre.status, RowStatus::Failed);
        assert_eq!(centre.reason.as_deref(), Some("ambiguous"));
        assert!(centre.values[0].is_nan());
        for r in &t.rows {
            let rho = r.q.hypot(r.p);
            if rho > 1.0 {
                assert_eq!(r.reason.as_deref(), Some("not_in_domain"), "{r:?}");
            } else if rho > 0.05 {
                assert_eq!(r.status, RowStatus::Ok, "{r:?}");
                // circle segment cut by the chord with mid-point at distance rho
                let want = rho.acos() - rho * (1.0 - rho * rho).sqrt();
                assert!((r.values[0] - want).abs() < 1e-6, "{r:?}");
            }
        }
        let rim = t.rows.iter().filter(|r| r.status == RowStatus::Ok).map(|r| (r.q.hypot(r.p), r.values[0]));
        for (rho, v) in rim {
            if rho > 0.99 {
                assert!(v.abs() < 1e-3);
            }
        }
    }

    #[test]
    fn dynamic_phase_at_time_zero() {
        let mut c = cfg(Experiment::Phase);
        c.params.t = 0.0;
        let t = run_compute(&c).unwrap();
        assert_eq!(t.failures(), 0);
        assert!(t.rows.iter().all(|r| r.values[0] == 0.0));
    }

    #[test]
    fn collinear_triangle_crosses_zero() {
        let mut c = cfg(Experiment::Triangle);
        c.grid = Grid::parse("-1:1:41,0:0:1").unwrap();
        let t = run_compute(&c).unwrap();
        assert_eq!(t.failures(), 0);
        assert!(t.rows.iter().all(|r| r.values[0].abs() < 1e-12));
        c.grid = Grid::parse("0:0:1,-0.5:0.5:21").unwrap();
        let t = run_compute(&c).unwrap();
        let v: Vec<f64> = t.rows.iter().map(|r| r.values[0]).collect();
        assert!(v[0] * v[20] < 0.0);
        assert!(v[10].abs() < 1e-12);
        assert!(v.windows(2).all(|w| (w[1] - w[0]).abs() < 0.2));
    }

    #[test]
    fn every_experiment_runs() {
        for ex in [Experiment::Product, Experiment::Groupoid, Experiment::Hj, Experiment::Torsion] {
            let mut c = cfg(ex);
            c.grid = Grid::parse("-0.4:0.4:3,-0.4:0.4:3").unwrap();
            if ex == Experiment::Torsion {
                c.fixture = FixtureSpec::named("torsion_const");
            }
            let t = run_compute(&c).unwrap();
            assert_eq!(t.failures(), 0, "{ex:?}: {:?}", t.rows);
        }
        let mut c = cfg(Experiment::Groupoid);
        c.fixture = FixtureSpec::named("darboux_pullback");
        c.grid = Grid::parse("-0.4:0.4:3,-0.4:0.4:3").unwrap();
        assert!(run_compute(&c).unwrap().rows.iter().all(|r| r.iterations > 0));
        assert!(run_compute(&cfg(Experiment::Verify)).is_err());
    }

    #[test]
    fn output_formats() {
        let mut c = cfg(Experiment::Chord);
        c.grid = Grid::parse("-0.5:0.5:3,0:0:1").unwrap();
        c.params.circle_center = [0.5, 0.0];
        c.params.circle_radius = 0.5;
        let t = run_compute(&c).unwrap();
        let mut csv = Vec::new();
        t.write(&mut csv, Format::Csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "q,p,phase,iterations,status,reason,detail");
        assert_eq!(data.len(), 4);
        let mut jsonl = Vec::new();
        t.write(&mut jsonl, Format::Jsonl).unwrap();
        let lines: Vec<serde_json::Value> =
            String::from_utf8(jsonl).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0]["experiment"], "chord");
    }
}
