use adhmkit::suite::{self, GenConfig};
use adhmkit::{hirz, ToleranceConfig, Verdict};

#[test]
fn bench_inputs_are_valid() {
    let tol = ToleranceConfig::default();
    for (seed, n, c) in [(1, 3, 2), (1, 3, 4), (1, 3, 6), (2, 3, 6), (3, 2, 4)] {
        let d = suite::gen_hirz_valid(&GenConfig::new(seed, n, c)).unwrap();
        assert_eq!(hirz::validate(&d, &tol).unwrap().verdict(), Verdict::Pass);
    }
}
