use std::hint::black_box;

use convexa::asa_log::as_lambda;
use convexa::legendre::{legendre_at, LegendreSolver};
use convexa::quadrature::{integrate_box, AxisBox};
use convexa::sconcave::s_dual_at;
use convexa::Method;
use convexa_bench::{bench_spec, gaussian, s_profile, smooth};
use criterion::{criterion_group, criterion_main, Criterion};

fn quadrature(c: &mut Criterion) {
    let region = AxisBox::new(vec![-8.0; 2], vec![8.0; 2]);
    let g = |x: &[f64]| (-0.5 * (x[0] * x[0] + 4.0 * x[1] * x[1])).exp();
    let mut group = c.benchmark_group("quadrature");
    for (name, method) in [("lattice", Method::Lattice), ("adaptive", Method::Adaptive)] {
        let spec = bench_spec().with_method(method);
        group.bench_function(name, |b| b.iter(|| integrate_box(g, &region, &spec).unwrap()));
    }
    group.finish();
}

fn legendre(c: &mut Criterion) {
    let solver = LegendreSolver::default();
    let mut group = c.benchmark_group("legendre");
    for (name, psi) in [("gaussian-2d", gaussian(&[1.0, 4.0])), ("smooth-2d", smooth(2, 1))] {
        group.bench_function(name, |b| b.iter(|| legendre_at(psi.as_ref(), black_box(&[0.7, -0.3]), &solver).unwrap()));
    }
    group.finish();
}

fn asa(c: &mut Criterion) {
    let spec = bench_spec();
    let mut group = c.benchmark_group("as_lambda");
    group.sample_size(10);
    for (name, psi) in [("gaussian-2d", gaussian(&[1.0, 4.0])), ("smooth-2d", smooth(2, 1))] {
        group.bench_function(name, |b| b.iter(|| as_lambda(black_box(0.5), psi.as_ref(), &spec).unwrap()));
    }
    group.finish();
}

fn s_dual(c: &mut Criterion) {
    let mut group = c.benchmark_group("s_dual");
    for n in [1, 2] {
        let fs = s_profile(n, 0.5, 1.0);
        let y = vec![0.4; n];
        group.bench_function(format!("profile-{n}d"), |b| b.iter(|| s_dual_at(&fs, black_box(&y)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, quadrature, legendre, asa, s_dual);
criterion_main!(benches);
