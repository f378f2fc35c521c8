//! Acceptance gate: one pass/fail line per criterion, every tolerance
//! pinned in the library harness.

use dissiprop::verify;

#[test]
fn acceptance_criteria() {
    let reports = verify::run_all();
    for report in &reports {
        println!("{}", report.summary_line());
        for detail in &report.details {
            println!("         {detail}");
        }
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).collect();
    assert!(
        failed.is_empty(),
        "{} criterion(s) failed: {:?}",
        failed.len(),
        failed.iter().map(|r| r.name).collect::<Vec<_>>()
    );
}
