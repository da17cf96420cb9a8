use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use toric_calabi::flow::{select_dt, step};
use toric_calabi::potential::{legendre_to_complex, NewtonConfig, XiSet};
use toric_calabi::{scalar_curvature, FlowConfig, FlowState, ReferenceFrame, SnapshotAudit};
use toric_calabi_bench::bump;

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("scalar_curvature");
    for (preset, h) in [
        ("interval", 1.0 / 64.0),
        ("square", 1.0 / 32.0),
        ("simplex", 1.0 / 32.0),
    ] {
        let sp = bump(preset, h, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(preset), &sp, |b, sp| {
            b.iter(|| scalar_curvature(black_box(sp)).unwrap())
        });
    }
    group.finish();
}

fn flow_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("rk4_step");
    let cfg = FlowConfig {
        t_end: 1.0,
        audits: false,
        ..FlowConfig::default()
    };
    for (preset, h) in [
        ("interval", 1.0 / 32.0),
        ("square", 1.0 / 16.0),
        ("simplex", 1.0 / 16.0),
    ] {
        let state = FlowState::new(bump(preset, h, 1.0)).unwrap();
        let dt = select_dt(&state, &cfg);
        group.bench_with_input(BenchmarkId::from_parameter(preset), &state, |b, s| {
            b.iter(|| step(black_box(s), dt, 1.0, &cfg).unwrap())
        });
    }
    group.finish();
}

fn legendre(c: &mut Criterion) {
    let mut group = c.benchmark_group("legendre_transform");
    group.sample_size(20);
    for (preset, h) in [("square", 1.0 / 16.0), ("simplex", 1.0 / 16.0)] {
        let sp = bump(preset, h, 1.0);
        let xi = XiSet::quadrature(&sp, 4).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(preset), &xi, |b, xi| {
            b.iter(|| legendre_to_complex(&sp, black_box(xi), &NewtonConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn snapshot_audit(c: &mut Criterion) {
    let mut group = c.benchmark_group("snapshot_audit");
    group.sample_size(10);
    let sp0 = bump("square", 1.0 / 16.0, 1.0);
    let frame = ReferenceFrame::new(sp0.clone(), NewtonConfig::default()).unwrap();
    let sp = bump("square", 1.0 / 16.0, 1.5);
    group.bench_function("square", |b| {
        b.iter(|| SnapshotAudit::compute(&frame, 0.0, black_box(&sp), &Default::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, curvature, flow_step, legendre, snapshot_audit);
criterion_main!(benches);
