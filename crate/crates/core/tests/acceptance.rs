//! All nine acceptance criteria at their stated tolerances, one line each.

use nrsurface::acceptance::run_all;

#[test]
fn acceptance_suite() {
    let verdicts = run_all(2024);
    for v in &verdicts {
        println!("{v}");
    }
    let failed: Vec<u8> = verdicts
        .iter()
        .filter(|v| !v.passed)
        .map(|v| v.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
