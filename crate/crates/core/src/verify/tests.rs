use super::*;
use crate::config::{Corrupt, RunConfig};
use crate::ether::FixtureSpec;

fn cfg(name: &str) -> RunConfig {
    RunConfig { fixture: FixtureSpec::named(name), samples: 12, heavy_samples: 4, ..RunConfig::default() }
}

fn failing(report: &CheckReport) -> Vec<String> {
    report
        .records
        .iter()
        .filter(|r| !r.ok())
        .map(|r| format!("{} {:?} {:?} {:?}", r.id, r.status, r.max_residual, r.error))
        .collect()
}

#[test]
fn euclid_passes() {
    let report = run_verify(&cfg("euclid_weyl_2n")).unwrap();
    assert!(report.ok(), "{:#?}", failing(&report));
    assert_eq!(report.exit_code(), 0);
    assert!(report.get("triangle-area").unwrap().pass);
}

#[test]
fn torsion_violates_involution() {
    let report = run_verify(&cfg("torsion_const")).unwrap();
    assert!(report.ok(), "{:#?}", failing(&report));
    let inv = report.get("involution").unwrap();
    assert_eq!(inv.status, Status::ExpectedFail);
    assert!(inv.max_residual.unwrap() > 1e-3);
    assert_eq!(report.get("zero-curvature").unwrap().status, Status::Pass);
}

#[test]
fn corrupted_hamiltonian_fails() {
    let mut c = cfg("euclid_weyl_2n");
    c.corrupt = Some(Corrupt { scale_h: 1.1 });
    let report = run_verify(&c).unwrap();
    assert_eq!(report.get("zero-curvature").unwrap().status, Status::Fail);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn deterministic_under_seed() {
    let c = cfg("darboux_pullback");
    let a = run_verify(&c).unwrap();
    let b = run_verify(&c).unwrap();
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.id, y.id);
        assert_eq!(x.max_residual.map(f64::to_bits), y.max_residual.map(f64::to_bits));
    }
}

#[test]
fn report_formats() {
    let mut c = cfg("euclid_weyl_2n");
    c.samples = 2;
    c.heavy_samples = 1;
    let report = run_verify(&c).unwrap();
    let mut csv = Vec::new();
    report.write(&mut csv, Format::Csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.lines().next().unwrap().starts_with('#'));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), report.records.len() + 1);
    let mut jsonl = Vec::new();
    report.write(&mut jsonl, Format::Jsonl).unwrap();
    for line in String::from_utf8(jsonl).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["fixture"], "euclid_weyl_2n");
    }
}
