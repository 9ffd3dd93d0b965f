//! Acceptance suite: one test per verification criterion, each printing a
//! pass/fail line. `cargo test --test acceptance -- --nocapture` shows the
//! lines as they complete; the CLI `verify` mode runs the same checks.

use backaction::verify::{self, CriterionResult};

fn check(result: CriterionResult) {
    println!("{result}");
    assert!(result.passed, "{result}");
}

#[test]
fn criterion_01_collapse_width() {
    check(verify::criterion_collapse_width());
}

#[test]
fn criterion_02_order_invariance() {
    check(verify::criterion_order_invariance());
}

#[test]
fn criterion_03_telescoping() {
    check(verify::criterion_telescoping());
}

#[test]
fn criterion_04_exhaustiveness() {
    check(verify::criterion_exhaustiveness());
}

#[test]
fn criterion_05_born_rule() {
    check(verify::criterion_born_rule());
}

#[test]
fn criterion_06_stirling_consistency() {
    check(verify::criterion_stirling());
}

#[test]
fn criterion_07_momentum_conservation() {
    check(verify::criterion_momentum_conservation());
}

#[test]
fn criterion_08_momentum_variance() {
    check(verify::criterion_momentum_variance());
}

#[test]
fn criterion_09_de_broglie() {
    check(verify::criterion_de_broglie());
}

#[test]
fn criterion_10_approximation_consistency() {
    check(verify::criterion_approximation_consistency());
}
