//! Run configuration: a single JSON document, every field defaulted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{EtherError, Result};
use crate::ether::{EtherStructure, FixtureSpec};
use crate::geometry::NumericSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tol_newton: f64,
    /// Overrides the per-identity tolerance of every check when set.
    pub tol_identity: Option<f64>,
    pub h_fd: f64,
    pub quad_order: usize,
    pub ode_steps: usize,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = NumericSettings::default();
        Self {
            tol_newton: s.tol_newton,
            tol_identity: None,
            h_fd: s.h_fd,
            quad_order: s.quad_order,
            ode_steps: s.ode_steps,
            max_iter: s.max_iter,
        }
    }
}

impl Tolerances {
    pub fn settings(&self) -> NumericSettings {
        NumericSettings {
            tol_newton: self.tol_newton,
            h_fd: self.h_fd,
            quad_order: self.quad_order,
            ode_steps: self.ode_steps,
            max_iter: self.max_iter,
            ..NumericSettings::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Verify,
    Phase,
    Triangle,
    Product,
    Chord,
    Groupoid,
    Torsion,
    Hj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = EtherError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(EtherError::Parameter(format!("unknown format `{other}` (csv or jsonl)"))),
        }
    }
}

/// One grid axis `min:max:n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        (0..self.n).map(|k| self.min + (self.max - self.min) * k as f64 / (self.n - 1) as f64).collect()
    }
}

/// Rectangular grid over the first canonical pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub q: Axis,
    pub p: Axis,
}

impl Default for Grid {
    fn default() -> Self {
        let a = Axis { min: -0.9, max: 0.9, n: 21 };
        Self { q: a, p: a }
    }
}

impl Grid {
    /// `qmin:qmax:n,pmin:pmax:n`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || EtherError::Parameter(format!("grid `{s}` is not of the form qmin:qmax:n,pmin:pmax:n"));
        let axis = |part: &str| -> Result<Axis> {
            let f: Vec<&str> = part.split(':').collect();
            if f.len() != 3 {
                return Err(bad());
            }
            Ok(Axis {
                min: f[0].trim().parse().map_err(|_| bad())?,
                max: f[1].trim().parse().map_err(|_| bad())?,
                n: f[2].trim().parse().map_err(|_| bad())?,
            })
        };
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 2 {
            return Err(bad());
        }
        Ok(Self { q: axis(parts[0])?, p: axis(parts[1])? })
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let qs = self.q.values();
        let ps = self.p.values();
        ps.iter().flat_map(|p| qs.iter().map(move |q| (*q, *p))).collect()
    }

    fn validate(&self, e: &EtherStructure) -> Result<()> {
        for a in [self.q, self.p] {
            if a.n == 0 || !(a.min.is_finite() && a.max.is_finite()) || a.min > a.max {
                return Err(EtherError::Parameter("grid axes need finite min ≤ max and n ≥ 1".into()));
            }
        }
        let d = &e.fixture.domain;
        let inside = |a: Axis, k: usize| a.min >= d.lo[k] && a.max <= d.hi[k];
        if !(inside(self.q, 0) && inside(self.p, 1)) {
            return Err(EtherError::Parameter(format!(
                "grid leaves the chart of {} ([{}, {}] × [{}, {}])",
                e.name(),
                d.lo[0],
                d.hi[0],
                d.lo[1],
                d.hi[1]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Deliberate fault injection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corrupt {
    #[serde(rename = "scale_H")]
    pub scale_h: f64,
}

/// Hamiltonian used by flow-based experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum HamiltonianSpec {
    #[default]
    Oscillator,
    /// Coefficients of `1, q, p, q², qp, p², q³, q²p, qp², p³`.
    Polynomial { coefficients: [f64; 10] },
}

/// Experiment parameters for `compute`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub t: f64,
    pub hamiltonian: HamiltonianSpec,
    /// Fixed mid-points `y`, `z` of the triangle experiment.
    pub y: [f64; 2],
    pub z: [f64; 2],
    pub circle_center: [f64; 2],
    pub circle_radius: f64,
    /// Momentum used by the groupoid experiment.
    pub momentum: [f64; 2],
}

impl Default for Params {
    fn default() -> Self {
        Self {
            t: 0.5,
            hamiltonian: HamiltonianSpec::Oscillator,
            y: [0.5, 0.0],
            z: [-0.5, 0.0],
            circle_center: [0.0, 0.0],
            circle_radius: 1.0,
            momentum: [0.2, -0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub fixture: FixtureSpec,
    pub tolerances: Tolerances,
    pub experiment: Experiment,
    pub grid: Grid,
    pub seed: u64,
    /// Sample count of the pointwise identities.
    pub samples: usize,
    /// Sample count of identities that nest several solvers.
    pub heavy_samples: usize,
    pub output: Output,
    pub corrupt: Option<Corrupt>,
    pub params: Params,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            fixture: FixtureSpec::default(),
            tolerances: Tolerances::default(),
            experiment: Experiment::Verify,
            grid: Grid::default(),
            seed: 1,
            samples: 100,
            heavy_samples: 20,
            output: Output::default(),
            corrupt: None,
            params: Params::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| EtherError::Parameter(format!("config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| EtherError::Parameter(format!("config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The fixture with tolerances and fault injection applied; also checks the grid.
    pub fn build_fixture(&self) -> Result<EtherStructure> {
        let mut spec = self.fixture.clone();
        if let Some(c) = &self.corrupt {
            if !(c.scale_h.is_finite() && c.scale_h != 0.0) {
                return Err(EtherError::Parameter("corrupt.scale_H must be finite and non-zero".into()));
            }
            spec.scale_h = Some(spec.scale_h.unwrap_or(1.0) * c.scale_h);
        }
        if let Some(t) = self.tolerances.tol_identity {
            if !(t.is_finite() && t > 0.0) {
                return Err(EtherError::Parameter("tolerances must be positive".into()));
            }
        }
        if self.samples == 0 || self.heavy_samples == 0 {
            return Err(EtherError::Parameter("sample counts must be positive".into()));
        }
        let e = spec.build(self.tolerances.settings())?;
        self.grid.validate(&e)?;
        Ok(e)
    }
}
