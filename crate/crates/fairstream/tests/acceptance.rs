use fairstream::acceptance::run_all;

#[test]
fn acceptance_criteria() {
    let outcomes = run_all(|o| println!("{o}"));
    let failed: Vec<_> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
