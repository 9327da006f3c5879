mod common;

use common::oracle;

#[test]
fn derived_kernel_examples_match_oracles() {
    let cases = oracle::kernel_cases();
    let failed: Vec<&str> = cases.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert!(failed.is_empty(), "failed oracle cases: {failed:?}");
    assert!(cases.len() >= 30, "only {} cases", cases.len());
}
