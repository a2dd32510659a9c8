use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ultralab_core::{build_derivative, build_grid, hamiltonian, spectrum, EuclideanScalar, PotentialSpec};

fn derivative(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_derivative");
    for m in [6, 8, 10] {
        let g = build_grid(m, (0.0, 1.0), 0.25, &[]).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &g, |b, g| {
            b.iter(|| build_derivative(black_box(g), 2, 1).unwrap())
        });
    }
    group.finish();
}

fn hamiltonian_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(10);
    for m in [5, 6, 7] {
        let g = build_grid(m, (0.0, 1.0), 0.25, &[]).unwrap();
        let d = build_derivative(&g, 2, 1).unwrap();
        let h = hamiltonian(&d, &PotentialSpec::DirichletBox { lo: 0.0, hi: 1.0 }).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &h, |b, h| b.iter(|| spectrum(black_box(h)).unwrap()));
    }
    group.finish();
}

fn scalars(c: &mut Criterion) {
    let x: EuclideanScalar = "3 + 5*a^-1 - 2*a^(1/2)".parse().unwrap();
    let y: EuclideanScalar = "a^-2 + 7".parse().unwrap();
    c.bench_function("scalar_mul", |b| b.iter(|| black_box(&x) * black_box(&y)));
    c.bench_function("scalar_invert", |b| b.iter(|| black_box(&y).invert().unwrap()));
    c.bench_function("scalar_parse", |b| b.iter(|| black_box("3 + 5*a^-1 - 2*a^(1/2)").parse::<EuclideanScalar>().unwrap()));
}

criterion_group!(benches, derivative, hamiltonian_spectrum, scalars);
criterion_main!(benches);
