//! Acceptance gate: runs every suite criterion at its pinned tolerance and
//! prints one pass/fail line per criterion.

use orthostab::suite::run_suite;
use orthostab::TolPolicy;

#[test]
fn acceptance_criteria() {
    let report = run_suite(20260810, &TolPolicy::default()).expect("suite runs");
    let mut all = true;
    for cr in &report.criteria {
        println!(
            "[{}] criterion {:>2}: {} ({} cases) - {}",
            if cr.pass { "PASS" } else { "FAIL" },
            cr.id,
            cr.name,
            cr.cases,
            cr.details
        );
        for f in &cr.failures {
            println!("        failure: {f}");
        }
        all &= cr.pass;
    }
    println!(
        "discrepancy ledger: {} entries; paired-class gap histogram: {:?}",
        report.discrepancies.len(),
        report
            .neg_pair_gap_histogram
            .iter()
            .map(|b| (b.gap, b.count))
            .collect::<Vec<_>>()
    );
    for d in &report.discrepancies {
        println!(
            "  discrepancy [{}]: formula {} vs oracle {} on {}",
            d.context, d.formula, d.oracle, d.witness
        );
    }
    assert!(all, "at least one acceptance criterion failed");
    assert!(report.all_pass);
}
