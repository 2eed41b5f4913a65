use graphrep::exact::suite::{gradient_suite, identity_suite};

#[test]
fn identity_suite_holds_on_corpus() {
    let t = std::time::Instant::now();
    let rows = identity_suite(Some(14)).unwrap();
    let bad: Vec<_> = rows.iter().filter(|r| !r.check.passes(1e-9)).collect();
    eprintln!("{} checks in {:?}", rows.len(), t.elapsed());
    for r in &bad {
        eprintln!("{} beta={} h={} {:?}", r.graph, r.beta, r.h, r.check);
    }
    assert!(bad.is_empty());
}

#[test]
fn gradient_identity_holds() {
    let rows = gradient_suite(Some(12)).unwrap();
    let bad: Vec<_> = rows.iter().filter(|r| !r.check.passes(1e-9)).collect();
    for r in &bad {
        eprintln!("{} beta={} {:?}", r.graph, r.beta, r.check);
    }
    assert!(bad.is_empty());
}
