use stressfirst::linalg::DEFAULT_RANK_TOL;
use stressfirst::verify::{run_suite, DEFAULT_SEED};

#[test]
fn default_suite_passes() {
    let records = run_suite(DEFAULT_SEED, DEFAULT_RANK_TOL).unwrap();
    for r in &records {
        println!("{:<40} {:>5} {:e} (threshold {:e})", r.name, r.passed, r.value, r.threshold);
    }
    let failed: Vec<_> = records.iter().filter(|r| !r.passed).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn suite_is_deterministic() {
    let a = run_suite(17, DEFAULT_RANK_TOL).unwrap();
    let b = run_suite(17, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.value.to_bits(), y.value.to_bits(), "{}", x.name);
    }
}
