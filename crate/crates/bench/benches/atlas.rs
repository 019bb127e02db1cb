use std::hint::black_box;

use adhmkit::suite::{self, GenConfig, SuiteConfig, SuiteOps};
use adhmkit::{geometry, hirz, plane, ToleranceConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn validation(cr: &mut Criterion) {
    let tol = ToleranceConfig::default();
    let mut group = cr.benchmark_group("validate");
    for c in [2, 4, 6] {
        let d = suite::gen_hirz_valid(&GenConfig::new(1, 3, c)).unwrap();
        group.bench_with_input(BenchmarkId::new("hirz", c), &d, |b, d| {
            b.iter(|| hirz::validate(black_box(d), &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("p3_direct", c), &d, |b, d| {
            b.iter(|| hirz::validate_p3_direct(black_box(d), &tol).unwrap())
        });
    }
    group.finish();
}

fn charts(cr: &mut Criterion) {
    let tol = ToleranceConfig::default();
    let mut group = cr.benchmark_group("charts");
    for c in [2, 4, 6] {
        let (d, m) = suite::gen_hirz_valid_with_chart(&GenConfig::new(2, 3, c)).unwrap();
        let cc = hirz::to_chart(&d, m, &tol).unwrap();
        group.bench_with_input(BenchmarkId::new("to_chart", c), &d, |b, d| {
            b.iter(|| hirz::to_chart(black_box(d), m, &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("from_chart", c), &cc, |b, cc| {
            b.iter(|| hirz::from_chart_coords(black_box(cc), &tol).unwrap())
        });
        let p = cc.plane();
        let l = (m + 1) % (c + 1);
        group.bench_with_input(BenchmarkId::new("transition_plane", c), &p, |b, p| {
            b.iter(|| plane::transition_plane(black_box(p), m as i64, l as i64, 3, c, &tol))
        });
    }
    group.finish();
}

fn orbits(cr: &mut Criterion) {
    let tol = ToleranceConfig::default();
    let mut group = cr.benchmark_group("orbits");
    for c in [2, 4] {
        let d = suite::gen_hirz_valid(&GenConfig::new(3, 2, c)).unwrap();
        group.bench_with_input(BenchmarkId::new("canonicalize", c), &d, |b, d| {
            b.iter(|| hirz::canonicalize(black_box(d), &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("base_support", c), &d, |b, d| {
            b.iter(|| geometry::base_support(black_box(d), &tol).unwrap())
        });
    }
    group.finish();
}

fn property_suite(cr: &mut Criterion) {
    let tol = ToleranceConfig::default();
    let cfg = SuiteConfig { samples: 5, ..SuiteConfig::default() };
    let mut group = cr.benchmark_group("suite");
    group.sample_size(10);
    group.bench_function("all_properties_5_samples", |b| {
        b.iter(|| suite::run_suite(black_box(&cfg), &tol, &SuiteOps::default()))
    });
    group.finish();
}

criterion_group!(benches, validation, charts, orbits, property_suite);
criterion_main!(benches);
