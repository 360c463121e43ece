//! The named verification suites pass and describe what they checked.
//! (padic-consistency is covered by the acceptance target.)

use barnesq_core::verify::{run_suite, Suite, SuiteOptions};

fn assert_passes(suite: Suite, n_max: u32) {
    let report = run_suite(suite, &SuiteOptions { n_max, ..SuiteOptions::default() });
    assert!(!report.checks.is_empty());
    let failures: Vec<_> = report.failures().map(|c| format!("{}: {:e} {}", c.name, c.residual, c.detail)).collect();
    assert!(failures.is_empty(), "{suite} failures:\n{}", failures.join("\n"));
    assert!(report.checks.iter().all(|c| !c.name.is_empty() && c.residual.is_finite()));
}

#[test]
fn identities() {
    assert_passes(Suite::Identities, 3);
}

#[test]
fn distribution() {
    assert_passes(Suite::Distribution, 6);
}

#[test]
fn interpolation() {
    assert_passes(Suite::Interpolation, 4);
}

#[test]
fn mellin() {
    assert_passes(Suite::Mellin, 0);
}
