use std::process::Command;

use grasscount_core::asymptotics::Precision;
use grasscount_core::counting::{enumerate_primitive, CountOptions, HeightBudget, Variant};
use grasscount_core::exact::parse_rational;
use grasscount_core::json::lattice_from_value;
use grasscount_core::{Lattice, Limits, Rational};
use grasscount_harness::emit::{emit, render, CSV_HEADER};
use grasscount_harness::sweep::run_sweep_with;
use grasscount_harness::verify::{verify_with, Oracle, Reference, Suite, VerifyOptions};
use grasscount_harness::{Error, Format, LatticeSource, Result, SweepConfig};
use num_bigint::BigInt;
use proptest::prelude::*;
use serde_json::Value;

fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn sweep(cfg: &SweepConfig) -> grasscount_harness::SweepReport {
    run_sweep_with(cfg, Limits::default(), Precision::digits(30)).unwrap()
}

#[test]
fn schmidt_sweep_ratios_approach_one() {
    let cfg = SweepConfig::new(LatticeSource::Identity(3), 1, vec![q(100), q(400), q(1600)]);
    let report = sweep(&cfg);
    let counts: Vec<u64> = report.rows.iter().map(|r| r.count.unwrap()).collect();
    assert_eq!(counts[2], 111481);
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    let errs: Vec<f64> = report.rows.iter().map(|r| (r.ratio.unwrap() - 1.0).abs()).collect();
    assert!(errs[2] < errs[0], "{errs:?}");
    assert!(errs[2] < 0.01);
    for row in &report.rows {
        assert!(row.leading_error.unwrap() > 0.0);
        assert_eq!(row.ms, None);
    }
    assert_eq!(report.metadata.constants["b"], "1");
}

#[test]
fn empty_and_single_row_csv() {
    let empty = sweep(&SweepConfig::new(LatticeSource::Identity(2), 1, vec![]));
    assert!(empty.rows.is_empty());
    let text = String::from_utf8(render(&empty, Format::Csv).unwrap()).unwrap();
    assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));

    let one = sweep(&SweepConfig::new(LatticeSource::Identity(2), 1, vec![q(25)]));
    let text = String::from_utf8(render(&one, Format::Csv).unwrap()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "h2,count,predicted,ratio,leading_error,ms");
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[0], "25");
    // Primitive (a, b) with a^2 + b^2 <= 25, up to sign: norms 1, 2, 5, 10, 13, 17, 25.
    assert_eq!(cells[1], "24");
    assert_eq!(cells[5], "");
}

#[test]
fn reruns_are_byte_identical() {
    let mut cfg = SweepConfig::new("random:3:7:3".parse().unwrap(), 1, vec![q(10), q(40), q(90)]);
    let a = sweep(&cfg);
    cfg.parallelism = Some(1);
    let b = sweep(&cfg);
    for f in [Format::Csv, Format::Json] {
        assert_eq!(render(&a, f).unwrap(), render(&b, f).unwrap());
    }
    assert_eq!(a.metadata.seed, Some(7));
}

#[test]
fn json_report_round_trips_the_lattice() {
    let cfg = SweepConfig::new("diag:1,2,3".parse().unwrap(), 2, vec![parse_rational("9/2").unwrap(), q(50)]);
    let report = sweep(&cfg);
    let v: Value = serde_json::from_slice(&render(&report, Format::Json).unwrap()).unwrap();
    let l = lattice_from_value(&v["metadata"]["lattice"]).unwrap();
    assert_eq!(l, "diag:1,2,3".parse::<LatticeSource>().unwrap().build().unwrap());
    assert_eq!(v["rows"][0]["h2"], "9/2");
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["metadata"]["variant"], "primitive");
}

#[test]
fn emit_writes_files_and_surfaces_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let report = sweep(&SweepConfig::new(LatticeSource::Identity(2), 1, vec![q(4)]));
    let path = dir.path().join("out.csv");
    emit(&report, Format::Csv, Some(&path)).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), render(&report, Format::Csv).unwrap());
    let missing = dir.path().join("no/such/dir/out.csv");
    let err = emit(&report, Format::Csv, Some(&missing)).unwrap_err();
    assert!(matches!(err, Error::Io(_)));
    let io = std::fs::File::create(&missing).unwrap_err();
    assert_eq!(err.to_string(), io.to_string());
}

#[test]
fn other_variants_sweep() {
    let mut all = SweepConfig::new(LatticeSource::Identity(3), 1, vec![q(4), q(9)]);
    all.variant = Variant::All;
    let r = sweep(&all);
    // Nonzero vectors of Z^3 with norm <= 4, up to sign: 3 + 6 + 4 + 3.
    assert_eq!(r.rows[0].count, Some(16));
    assert!(r.rows.iter().all(|row| row.ratio.unwrap().is_finite()));

    let mut flags = SweepConfig::new(LatticeSource::Identity(3), 2, vec![q(1), q(16)]);
    flags.variant = Variant::Flags;
    flags.e = Some(1);
    let r = sweep(&flags);
    assert_eq!(r.rows[0].count, Some(6));
    // At the cutoff the main term vanishes, so no ratio.
    assert_eq!(r.rows[0].predicted, Some(0.0));
    assert_eq!(r.rows[0].ratio, None);
    assert!(r.rows[1].ratio.unwrap().is_finite());
    assert!(r.metadata.constants["flag"].as_str().unwrap().starts_with("2.4957221177"));

    let mut avoid = SweepConfig::new(LatticeSource::Identity(3), 1, vec![q(2)]);
    avoid.variant = Variant::Avoiding;
    avoid.avoid = Some(vec![vec![1, 0, 0]]);
    // Primitive vectors of norm <= 2 are e_i and e_i +- e_j; only +-e_1 meets S.
    assert_eq!(sweep(&avoid).rows[0].count, Some(8));
}

/// Reports one extra sublattice on the polar side.
struct OffByOne;

impl Oracle for OffByOne {
    fn polar_count(&self, l: &Lattice, d: usize, budget: &HeightBudget, opts: &CountOptions) -> Result<u64> {
        Ok(Reference.polar_count(l, d, budget, opts)? + 1)
    }
}

fn small(seed: u64) -> VerifyOptions {
    VerifyOptions { instances: Some(4), ..VerifyOptions::new(seed) }
}

#[test]
fn tampered_oracle_is_caught_with_a_replayable_counterexample() {
    let report = verify_with(&[Suite::Duality], &small(3), &OffByOne).unwrap();
    assert!(!report.passed);
    let failure = &report.suites[0].failures[0];
    let got: u64 = failure.got.parse().unwrap();
    let expected: u64 = failure.expected.parse().unwrap();
    assert_eq!(expected, got + 1);
    // Replaying the instance with the real oracle agrees with the library.
    let inst = &failure.instance;
    let l = lattice_from_value(&inst["lattice"]).unwrap();
    let d = inst["d"].as_u64().unwrap() as usize;
    let budget: HeightBudget = inst["h2"].as_str().unwrap().parse().unwrap();
    let count = enumerate_primitive(&l, d, &budget, &CountOptions::default()).unwrap().count;
    assert_eq!(count, got);
    assert_eq!(Reference.polar_count(&l, d, &budget, &CountOptions::default()).unwrap(), count);
    // Suites not touching the tampered method still pass.
    assert!(verify_with(&[Suite::Projection], &small(3), &OffByOne).unwrap().passed);
}

#[test]
fn verify_all_is_deterministic() {
    let a = verify_with(&Suite::ALL, &small(11), &Reference).unwrap();
    let b = verify_with(&Suite::ALL, &small(11), &Reference).unwrap();
    assert!(a.passed, "{:?}", a.suites.iter().flat_map(|s| &s.failures).collect::<Vec<_>>());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.suites.len(), 7);
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_grasscount")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn command_line() {
    let (code, out) = cli(&["constants", "--n", "4", "--d", "2"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["a"].as_str().unwrap().starts_with("6.23930529435530601512344709116148050812"));
    assert_eq!(v["b"], "1/2");

    let (code, out) = cli(&["count", "--lattice", "identity:4", "--d", "2", "--h2", "36"]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["count"], 7994);

    let (code, out) = cli(&["count", "--lattice", "identity:3", "--d", "2", "--e", "1", "--variant", "flags", "--h2", "1"]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["count"], 6);

    let (code, out) = cli(&["hecke", "--d", "2", "--k", "4", "--list"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], "6");
    assert_eq!(v["reps"].as_array().unwrap().len(), 6);

    let (code, out) = cli(&["verify", "--suite", "hecke", "--seed", "42"]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["passed"], true);

    assert_eq!(cli(&["verify", "--suite", "nope"]).0, 2);
    assert_eq!(cli(&["count", "--lattice", "identity:3"]).0, 2);
    assert_eq!(cli(&["count", "--lattice", "identity:3", "--d", "3", "--h2", "1"]).0, 2);
    assert_eq!(cli(&["count", "--lattice", "bogus:3", "--d", "1", "--h2", "1"]).0, 1);
    assert_eq!(cli(&["frobnicate"]).0, 2);
}

#[test]
fn sweep_command_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out.csv");
    std::fs::write(&cfg, r#"{ "lattice": "identity:2", "d": 1, "ladder": [1, "2", 25] }"#).unwrap();
    let (code, _) = cli(&["sweep", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let counts: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts, ["2", "4", "24"]);

    std::fs::write(&cfg, r#"{ "lattice": "identity:2", "d": 1, "ladder": [4, 1] }"#).unwrap();
    assert_eq!(cli(&["sweep", "--config", cfg.to_str().unwrap()]).0, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sweeps_keep_ladder_order_and_monotone_counts(steps in prop::collection::btree_set(1i64..400, 0..6)) {
        let ladder: Vec<Rational> = steps.iter().map(|&s| Rational::new(BigInt::from(s), BigInt::from(4))).collect();
        let cfg = SweepConfig::new(LatticeSource::Identity(3), 1, ladder.clone());
        let report = sweep(&cfg);
        prop_assert_eq!(report.rows.iter().map(|r| r.h2.clone()).collect::<Vec<_>>(), ladder);
        let counts: Vec<u64> = report.rows.iter().map(|r| r.count.unwrap()).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        for r in &report.rows {
            prop_assert!(r.ratio.unwrap().is_finite());
        }
    }
}
