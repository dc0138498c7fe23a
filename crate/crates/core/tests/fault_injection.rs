//! A corrupted dual must be caught by the duality criterion and by the
//! end-to-end reduction. Lives in its own binary since the fault is global.

use latmid::forms::set_dual_fault;
use latmid::suite::{run, SuiteConfig};

#[test]
fn corrupted_dual_is_detected() {
    let cfg = SuiteConfig { cases: Some(10), ..SuiteConfig::default() };
    set_dual_fault(true);
    let duality = run(4, &cfg);
    let e2e = run(8, &cfg);
    set_dual_fault(false);
    assert!(!duality.passed());
    assert!(!e2e.passed());
    let dump = duality.counterexample.expect("a counterexample is recorded");
    assert!(dump.contains("gram = "), "{dump}");
    assert!(run(4, &cfg).passed());
}
