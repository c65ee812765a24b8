use criterion::{criterion_group, criterion_main, Criterion};
use curvecap_bench::{circle_fibers, hyperbola, worked_example};
use curvecap_core::chebyshev::{tau_s, MinimaxConfig};
use curvecap_core::fekete::greedy_fekete;
use curvecap_core::{buchberger, BasisKind, Curve, CurveConfig};
use std::hint::black_box;

fn groebner(c: &mut Criterion) {
    let ideal = worked_example();
    c.bench_function("buchberger/worked_example", |b| b.iter(|| buchberger(black_box(&ideal)).unwrap()));
}

fn minimax(c: &mut Criterion) {
    let ideal = hyperbola();
    let curve = Curve::analyze(&ideal, 12, CurveConfig::default()).unwrap();
    let k = circle_fibers(&ideal, 32, 1);
    let cfg = MinimaxConfig::default();
    c.bench_function("tau_s/hyperbola_s8", |b| b.iter(|| tau_s(&curve, &k, 0, black_box(8), &cfg).unwrap()));
}

fn fekete(c: &mut Criterion) {
    let ideal = hyperbola();
    let curve = Curve::analyze(&ideal, 12, CurveConfig::default()).unwrap();
    let k = circle_fibers(&ideal, 64, 1);
    c.bench_function("greedy_fekete/hyperbola_m21", |b| {
        b.iter(|| greedy_fekete(&curve, &k, black_box(21), BasisKind::C).unwrap())
    });
}

criterion_group!(benches, groebner, minimax, fekete);
criterion_main!(benches);
