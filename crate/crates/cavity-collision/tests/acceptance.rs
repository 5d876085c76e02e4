//! Full acceptance suite over the default configuration, one criterion per
//! line so failures can be read straight off the test output.

use cavity_collision::acceptance::run_all;
use cavity_collision::config::RunConfig;

#[test]
fn acceptance_suite() {
    let cfg = RunConfig::default();
    let results = run_all(&cfg).expect("acceptance suite should run to completion");
    assert_eq!(results.len(), 11);

    let mut failed = 0;
    for r in &results {
        println!("{}", r.line());
        if !r.pass {
            failed += 1;
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
