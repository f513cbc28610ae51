use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use subgeo_core::builtins::build;
use subgeo_core::field::christoffel_values;
use subgeo_core::geodesics::integrate_geodesic;
use subgeo_core::geometry::check_is_statistical;
use subgeo_core::{sample, DiffMode, Jet};

fn jets(c: &mut Criterion) {
    let x = Jet::variables(&[0.3, 1.2, 0.7], 3);
    c.bench_function("jet/exp_ln_order3_dim3", |b| {
        b.iter(|| black_box(&x[1]).ln().exp().recip())
    });
}

fn christoffel(c: &mut Criterion) {
    let mut group = c.benchmark_group("christoffel");
    for (name, mode) in [
        ("hyperbolic:3", DiffMode::Jet),
        ("hyperbolic:3", DiffMode::Fd),
        ("gaussian:alpha=0.5", DiffMode::Jet),
    ] {
        let model = build(name, mode).unwrap();
        let p = model.manifold.domain.center();
        group.bench_function(format!("{name}/{mode}"), |b| {
            b.iter(|| christoffel_values(model.manifold.connection.as_ref(), black_box(&p)).unwrap())
        });
    }
    group.finish();
}

fn frame(c: &mut Criterion) {
    let mut group = c.benchmark_group("frame");
    for name in ["hyperbolic:3", "tangent_bundle_of:hyperbolic:2"] {
        let model = build(name, DiffMode::Jet).unwrap();
        let setup = model.submersion.unwrap();
        let p = setup.total.domain.center();
        group.bench_function(name, |b| b.iter(|| setup.frame(black_box(&p)).unwrap()));
    }
    group.finish();
}

fn geodesic(c: &mut Criterion) {
    let model = build("hyperbolic:2", DiffMode::Jet).unwrap();
    let m = &model.manifold;
    c.bench_function("geodesic/hyperbolic:2_semicircle_1000_steps", |b| {
        b.iter(|| integrate_geodesic(m.connection.as_ref(), &m.domain, &[0.0, 1.0], &[1.0, 0.0], 1.0, 1e-3).unwrap())
    });
}

fn statistical_sweep(c: &mut Criterion) {
    let model = build("hyperbolic:3", DiffMode::Jet).unwrap();
    let m = &model.manifold;
    let pts = sample(&m.domain, 16, 0).unwrap().points;
    c.bench_function("check/is_statistical_hyperbolic:3_16_points", |b| {
        b.iter(|| check_is_statistical(m.connection.as_ref(), m.metric.as_ref(), &pts, 1e-8).unwrap())
    });
}

criterion_group!(benches, jets, christoffel, frame, geodesic, statistical_sweep);
criterion_main!(benches);
