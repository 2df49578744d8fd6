use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use thermfuse_core::{compute_activity, fuse_pipeline, preset, simulate_stack, FusionConfig};

fn activity(c: &mut Criterion) {
    let sim = simulate_stack(&preset("5").unwrap(), 7).unwrap();
    let frame = &sim.stack.frames()[20];
    let cfg = FusionConfig::default();
    c.bench_function("activity_160x120", |b| {
        b.iter(|| compute_activity(black_box(frame), &cfg).unwrap())
    });
}

fn fusion(c: &mut Criterion) {
    let sim = simulate_stack(&preset("5").unwrap(), 7).unwrap();
    let cfg = FusionConfig::default();
    let mut group = c.benchmark_group("fuse_pipeline_96_frames");
    group.sample_size(10);
    group.bench_function("preselect", |b| {
        b.iter(|| fuse_pipeline(black_box(&sim.stack), &cfg, true).unwrap())
    });
    group.bench_function("all_frames", |b| {
        b.iter(|| fuse_pipeline(black_box(&sim.stack), &cfg, false).unwrap())
    });
    group.finish();
}

fn simulate(c: &mut Criterion) {
    let scene = preset("3").unwrap();
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    group.bench_function("preset3_96_frames", |b| {
        b.iter(|| simulate_stack(black_box(&scene), 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, activity, fusion, simulate);
criterion_main!(benches);
