//! The verification suite: every identity as a sampled residual with a
//! tolerance, collected into a [`CheckReport`].

mod checks;

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::Result;
use crate::ether::EtherStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// A failure the fixture is built to exhibit.
    ExpectedFail,
    /// An expected failure that did not happen.
    UnexpectedPass,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub samples: usize,
    /// Samples whose solver failed.
    pub failures: usize,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub expected_fail: bool,
    pub status: Status,
    pub error: Option<String>,
    pub wall_ms: f64,
}

impl CheckRecord {
    fn finish(mut self) -> Self {
        self.pass = self.failures == 0 && self.max_residual.is_some_and(|r| r < self.tolerance);
        self.status = match (self.pass, self.expected_fail) {
            (true, false) => Status::Pass,
            (false, false) => Status::Fail,
            (false, true) => Status::ExpectedFail,
            (true, true) => Status::UnexpectedPass,
        };
        self
    }

    pub fn ok(&self) -> bool {
        matches!(self.status, Status::Pass | Status::ExpectedFail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub fixture: String,
    pub seed: u64,
    pub records: Vec<CheckRecord>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.records.iter().all(CheckRecord::ok)
    }

    pub fn get(&self, id: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// `0` when every identity behaves as expected, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.ok() {
            0
        } else {
            1
        }
    }

    pub fn write<W: Write + ?Sized>(&self, out: &mut W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Jsonl => {
                for r in &self.records {
                    let mut v = serde_json::to_value(r).map_err(std::io::Error::other)?;
                    v["fixture"] = self.fixture.clone().into();
                    writeln!(out, "{v}")?;
                }
            }
            Format::Csv => {
                writeln!(out, "# etherphase verify")?;
                writeln!(out, "# fixture: {}", self.fixture)?;
                writeln!(out, "# seed: {}", self.seed)?;
                writeln!(out, "# pass means max_residual < tolerance with no solver failures")?;
                writeln!(out, "# status: pass | fail | expected-fail | unexpected-pass; wall_ms is timing only")?;
                writeln!(out, "id,samples,failures,max_residual,tolerance,pass,expected_fail,status,error,wall_ms")?;
                for r in &self.records {
                    let status = serde_json::to_value(r.status).map_err(std::io::Error::other)?;
                    writeln!(
                        out,
                        "{},{},{},{},{:e},{},{},{},{},{:.3}",
                        r.id,
                        r.samples,
                        r.failures,
                        r.max_residual.map_or("NaN".to_string(), |v| format!("{v:e}")),
                        r.tolerance,
                        r.pass,
                        r.expected_fail,
                        status.as_str().unwrap_or("?"),
                        csv_field(r.error.as_deref().unwrap_or("")),
                        r.wall_ms
                    )?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Runs one identity on `n` independent samples.
pub(crate) struct Runner<'a> {
    pub e: &'a EtherStructure,
    pub cfg: &'a RunConfig,
    records: Vec<CheckRecord>,
}

impl<'a> Runner<'a> {
    fn new(e: &'a EtherStructure, cfg: &'a RunConfig) -> Self {
        Self { e, cfg, records: Vec::new() }
    }

    /// Sample stream `i` of identity `id`; independent of scheduling.
    pub fn rng(&self, id: &str, i: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ fnv1a(id));
        rng.set_stream(i as u64);
        rng
    }

    pub fn check<F>(&mut self, id: &str, n: usize, tol: f64, f: F) -> &mut CheckRecord
    where
        F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
    {
        let start = Instant::now();
        let results: Vec<Result<f64>> = (0..n).into_par_iter().map(|i| f(&mut self.rng(id, i))).collect();
        let mut max: Option<f64> = None;
        let mut failures = 0;
        let mut error = None;
        for r in results {
            match r {
                Ok(v) if v.is_finite() => max = Some(max.map_or(v, |m: f64| m.max(v))),
                Ok(v) => {
                    failures += 1;
                    error.get_or_insert_with(|| format!("non-finite residual {v}"));
                }
                Err(err) => {
                    failures += 1;
                    error.get_or_insert_with(|| err.to_string());
                }
            }
        }
        let rec = CheckRecord {
            id: id.to_string(),
            samples: n,
            failures,
            max_residual: max,
            tolerance: self.cfg.tolerances.tol_identity.unwrap_or(tol),
            pass: false,
            expected_fail: false,
            status: Status::Fail,
            error,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        }
        .finish();
        self.records.push(rec);
        self.records.last_mut().expect("just pushed")
    }
}

impl CheckRecord {
    /// Marks the identity as one the fixture must violate.
    pub(crate) fn expect_fail(&mut self) {
        self.expected_fail = true;
        let done = self.clone().finish();
        *self = done;
    }
}

/// Builds the fixture from `cfg` and runs every identity that applies to it.
pub fn run_verify(cfg: &RunConfig) -> Result<CheckReport> {
    let e = cfg.build_fixture()?;
    Ok(verify_structure(&e, cfg))
}

/// The suite on an already built structure.
pub fn verify_structure(e: &EtherStructure, cfg: &RunConfig) -> CheckReport {
    let mut run = Runner::new(e, cfg);
    checks::all(&mut run);
    CheckReport { fixture: e.name().to_string(), seed: cfg.seed, records: run.records }
}

#[cfg(test)]
mod tests;
