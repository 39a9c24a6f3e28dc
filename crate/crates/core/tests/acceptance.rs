//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with its case counts; the stated runtime budgets are asserted where the
//! criterion pins one.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use calab_core::filtered::{property_constant, Caps, Mode, PropertyKind};
use calab_core::scenario::{build, run, Scenario};
use calab_core::suite::run_suite;
use std::time::{Duration, Instant};

const SEED: u64 = 2026;

fn caps() -> Caps {
    Caps::default()
}

fn run_and_report(n: usize, name: &str, budget: Option<Duration>) -> calab_core::suite::SuiteOutcome {
    let start = Instant::now();
    let outcome = run_suite(name, SEED, &caps()).expect("registered suite");
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE {n} [{name}] {} — {}/{} cases in {:.1}s{}",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.cases_total - outcome.cases_failed,
        outcome.cases_total,
        elapsed.as_secs_f64(),
        budget
            .map(|b| format!(" (budget {:.0}s)", b.as_secs_f64()))
            .unwrap_or_default(),
    );
    if !outcome.passed {
        println!("{}", outcome.detail);
    }
    if let Some(b) = budget {
        assert!(
            elapsed <= b,
            "criterion {n} exceeded its {:.0}s budget: {:.1}s",
            b.as_secs_f64(),
            elapsed.as_secs_f64()
        );
    }
    assert!(outcome.passed, "criterion {n} failed:\n{}", outcome.detail);
    outcome
}

#[test]
fn criterion_01_kernel_split_bound_suite() {
    run_and_report(1, "kernel-split", Some(Duration::from_secs(60)));
}

#[test]
fn criterion_02_tightness_witness_path3() {
    // The shipped path scenario: kernel split constant exactly 2 = δ + 2b + d
    // with δ = 0, b = 1, d = 0, computed rather than asserted.
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/path3-kernel.json"
    ))
    .expect("shipped scenario");
    let scenario = Scenario::from_json(&text).expect("parses");
    let built = build(scenario).expect("builds");
    let (report, _) = run(&built).expect("runs");
    assert!(!report.failed(), "{}", report.to_json());
    let ks = report
        .checks
        .iter()
        .find(|c| c.kind == "kernel-split-bound")
        .expect("kernel split check present");
    assert_eq!(ks.details["kernel_split"], serde_json::json!(2));
    assert_eq!(ks.details["bound"], serde_json::json!(2));

    // The same equality holds when computed exhaustively on the raw objects.
    let built2 = build(Scenario::from_json(&text).unwrap()).unwrap();
    let map = &built2.maps["phi"];
    let kernel = map.kernel();
    let split = property_constant(
        &kernel.filtration,
        PropertyKind::Split,
        Mode::Exhaustive,
        &caps(),
    )
    .unwrap();
    assert_eq!(split.value, Some(2));
    println!("ACCEPTANCE 2 [path3 tightness] PASS — kernel split constant exactly 2");
}

#[test]
fn criterion_03_distribution_suite() {
    run_and_report(3, "kernel-parts", None);
}

#[test]
fn criterion_04_chain_certification() {
    run_and_report(4, "kernel-lean", Some(Duration::from_secs(120)));
}

#[test]
fn criterion_05_idempotent_bicontrol() {
    run_and_report(5, "idempotent", None);
}

#[test]
fn criterion_06_geometry_invariants() {
    run_and_report(6, "geometry", None);
}

#[test]
fn criterion_07_linalg_oracle() {
    run_and_report(7, "linalg-oracle", Some(Duration::from_secs(10)));
}

#[test]
fn criterion_08_game_engine() {
    run_and_report(8, "game", None);
}

#[test]
fn criterion_09_presentation_constants() {
    run_and_report(9, "presentation", None);
}

#[test]
fn criterion_10_equivariance() {
    run_and_report(10, "equivariance", None);
}
