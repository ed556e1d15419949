use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use witsamp_bench::{minors_witness, target};
use witsamp_core::tracker;
use witsamp_core::{polysys, solver, TrackerConfig, TrackingMode};

fn moves(c: &mut Criterion) {
    let cfg = TrackerConfig {
        record_condition: false,
        ..TrackerConfig::default()
    };
    let mut group = c.benchmark_group("move_witness");
    group.sample_size(10);
    for cols in [3usize, 4] {
        let w = minors_witness(cols);
        let plane = target(&w, 0);
        for mode in [TrackingMode::Local, TrackingMode::Global] {
            group.bench_with_input(BenchmarkId::new(mode.to_string(), format!("2x{cols}")), &plane, |b, plane| {
                b.iter(|| tracker::move_witness(&w, plane, &cfg, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn witness_generation(c: &mut Criterion) {
    let f = polysys::adjacent_minors(4).unwrap();
    let cfg = TrackerConfig::default();
    let mut group = c.benchmark_group("witness_generate");
    group.sample_size(10);
    group.bench_function("minors4", |b| b.iter(|| solver::witness_generate(&f, 3, 4, &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, moves, witness_generation);
criterion_main!(benches);
