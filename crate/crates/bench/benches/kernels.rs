use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use langevin_gauss::linalg::{mat_exp, solve_lyapunov_kron, solve_lyapunov_quadrature, Matrix};
use langevin_gauss::model::builtin;
use langevin_gauss::sde::{simulate_ensemble, NoiseStream, SimConfig};
use langevin_gauss::transport::{solve_assignment, w_p_sorted_1d};

fn stable(n: usize, seed: u64) -> Matrix {
    let mut s = NoiseStream::new(seed, 0);
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = 0.3 * s.normal() + if i == j { 2.0 } else { 0.0 };
        }
    }
    Matrix::from_rows(&rows).unwrap()
}

fn expm(c: &mut Criterion) {
    let mut g = c.benchmark_group("expm");
    for n in [2, 4, 8, 16] {
        let a = stable(n, n as u64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| mat_exp(black_box(a), 1.0).unwrap()));
    }
    g.finish();
}

fn lyapunov(c: &mut Criterion) {
    let mut g = c.benchmark_group("lyapunov");
    for n in [2, 4, 8] {
        let a = stable(n, 100 + n as u64);
        let q = Matrix::identity(n);
        g.bench_with_input(BenchmarkId::new("kron", n), &n, |b, _| {
            b.iter(|| solve_lyapunov_kron(black_box(&a), black_box(&q)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("quadrature", n), &n, |b, _| {
            b.iter(|| solve_lyapunov_quadrature(black_box(&a), black_box(&q), 1e-10).unwrap())
        });
    }
    g.finish();
}

fn assignment(c: &mut Criterion) {
    let mut g = c.benchmark_group("assignment");
    g.sample_size(20);
    for n in [100, 400, 1000] {
        let mut s = NoiseStream::new(7, n as u64);
        let cost: Vec<f64> = (0..n * n).map(|_| s.normal().abs()).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| solve_assignment(black_box(&cost), n)));
    }
    let mut s = NoiseStream::new(9, 0);
    let x: Vec<f64> = (0..10_000).map(|_| s.normal()).collect();
    let y: Vec<f64> = (0..10_000).map(|_| s.normal()).collect();
    g.bench_function("sorted_1d_10000", |b| b.iter(|| w_p_sorted_1d(black_box(&x), black_box(&y), 2.0).unwrap()));
    g.finish();
}

fn ensemble(c: &mut Criterion) {
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    for name in ["linear1d", "quartic1d", "rotational2d"] {
        let spec = builtin(name, &[]).unwrap();
        let cfg = SimConfig::new(0.05, 1e-3, 1.0, 1000, 1);
        g.bench_function(name, |b| b.iter(|| simulate_ensemble(black_box(&spec), &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, expm, lyapunov, assignment, ensemble);
criterion_main!(benches);
