use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use resoline::czeros::resonances;
use resoline::wavekernel::solve_kernels;
use resoline::xhat;
use resoline_bench::{k_grid, square, staircase};

fn bench_xhat(c: &mut Criterion) {
    let ks = k_grid();
    let mut group = c.benchmark_group("xhat_grid");
    for (name, v) in [("square", square()), ("staircase", staircase())] {
        group.bench_function(name, |b| {
            b.iter(|| ks.iter().map(|&k| xhat(black_box(&v), k)).sum::<num_complex::Complex64>())
        });
    }
    group.finish();
}

fn bench_kernels(c: &mut Criterion) {
    let v = square();
    let mut group = c.benchmark_group("solve_kernels");
    group.sample_size(10);
    for n in [256, 1024] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| solve_kernels(black_box(&v), n)));
    }
    group.finish();
}

fn bench_resonances(c: &mut Criterion) {
    let v = square();
    let mut group = c.benchmark_group("resonances");
    group.sample_size(10);
    for radius in [10.0, 40.0] {
        group.bench_with_input(BenchmarkId::from_parameter(radius), &radius, |b, &r| {
            b.iter(|| resonances(black_box(&v), r).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_xhat, bench_kernels, bench_resonances);
criterion_main!(benches);
