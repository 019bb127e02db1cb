use adhmkit::geometry::{self, YTildePoint};
use adhmkit::hirz::{self, HirzADHM};
use adhmkit::suite::{self, GenConfig};
use adhmkit::{linalg, plane, wire, AdhmError, ComplexMatrix, PlaneADHM, ToleranceConfig, Verdict, C64};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn scalar(x: f64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, C64::new(x, 0.0))
}

#[test]
fn json_round_trip_is_exact() {
    for seed in 0..10 {
        let d = suite::gen_hirz_valid(&GenConfig::new(seed, 1 + seed as usize % 3, 1 + seed as usize % 5)).unwrap();
        let text = serde_json::to_string(&wire::hirz_value(&d)).unwrap();
        let back = wire::parse_hirz(&text).unwrap();
        assert_eq!(back, d);
        let p = suite::gen_plane_valid(&GenConfig::new(seed, 1, 3)).unwrap();
        let text = serde_json::to_string(&wire::plane_value(&p)).unwrap();
        assert_eq!(wire::parse_plane(&text).unwrap(), p);
    }
}

#[test]
fn unknown_fields_and_wrong_kind_are_rejected() {
    let extra = r#"{"c":1,"b1":[[1]],"b2":[[1]],"e":[1],"extra":0}"#;
    assert!(matches!(wire::parse_plane(extra), Err(AdhmError::Parse(_))));
    let wrong = r#"{"kind":"hirz_adhm","c":1,"b1":[[1]],"b2":[[1]],"e":[1]}"#;
    assert!(wire::parse_plane(wrong).is_err());
}

#[test]
fn chart_pipeline_on_generated_points() {
    let t = tol();
    for seed in 0..20u64 {
        let (d, m) = suite::gen_hirz_valid_with_chart(&GenConfig::new(seed, 1 + seed as usize % 4, 1 + seed as usize % 4)).unwrap();
        let v = hirz::validate(&d, &t).unwrap();
        assert_eq!(v.verdict(), Verdict::Pass);
        assert!(v.charts.contains(&m));
        let cc = hirz::to_chart(&d, m, &t).unwrap();
        let back = hirz::from_chart_coords(&cc, &t).unwrap();
        let scale = [&d.a1, &d.a2, &d.e].into_iter().chain(&d.cs).map(linalg::fro_norm).fold(1.0, f64::max);
        assert!(back.distance(&d) <= 1e-9 * scale);
        assert!(hirz::orbit_equal(&d, &back, &t).unwrap());
    }
}

#[test]
fn scalar_transition_example() {
    let p = PlaneADHM::scalar(C64::new(2.0, 0.0), C64::new(5.0, 0.0), C64::new(7.0, 0.0));
    let q = plane::transition_plane(&p, 1, 0, 1, 1, &tol()).unwrap();
    assert!((q.b1[(0, 0)] - C64::new(-0.5, 0.0)).norm() < 1e-14);
    assert!((q.b2[(0, 0)] - C64::new(-10.0, 0.0)).norm() < 1e-14);
    assert_eq!(q.e[(0, 0)], C64::new(7.0, 0.0));
}

#[test]
fn transition_through_a_non_chart_is_an_error() {
    let p = PlaneADHM::scalar(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    assert!(plane::transition_plane(&p, 1, 0, 2, 1, &tol()).is_err());
}

#[test]
fn c1_maps_agree_with_hand_computation() {
    let t = tol();
    let y = YTildePoint {
        y1: C64::new(1.0, 0.0),
        y2: C64::new(2.0, 0.0),
        x1: C64::new(2.0, 0.0),
        x2: C64::new(1.0, 0.0),
    };
    let d = geometry::ytilde_to_p1(&y, 2).unwrap();
    assert_eq!(hirz::validate(&d, &t).unwrap().verdict(), Verdict::Pass);
    let d = HirzADHM::new(scalar(2.0), scalar(1.0), vec![scalar(3.0), scalar(6.0)], scalar(1.0)).unwrap();
    let p = geometry::p1_to_tot(&d, &t).unwrap();
    assert!(p.relation_residual(2) <= 1e-12);
    assert!((p.u1 - C64::new(3.0, 0.0)).norm() < 1e-14);
    assert!((p.u2 - C64::new(12.0, 0.0)).norm() < 1e-14);
}

#[test]
fn support_is_gauge_invariant_and_separates() {
    let t = tol();
    let d = suite::gen_hirz_valid(&GenConfig::new(5, 2, 3)).unwrap();
    let s = geometry::base_support(&d, &t).unwrap();
    assert_eq!(s.base.len(), 3);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
    let g = hirz::act_gl2(
        &d,
        &suite::random_well_conditioned(&mut rng, 3, 10.0),
        &suite::random_well_conditioned(&mut rng, 3, 10.0),
        &t,
    )
    .unwrap();
    assert!(hirz::orbit_equal(&d, &g, &t).unwrap());
    let other = suite::gen_hirz_valid(&GenConfig::new(6, 2, 3)).unwrap();
    assert!(!hirz::orbit_equal(&d, &other, &t).unwrap());
}
