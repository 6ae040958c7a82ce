use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use infmul::convolution::{oracle_free_product, oracle_monotone_product, MonotoneOrder};
use infmul::partitions::{enumerate_nc, enumerate_ncl};
use infmul::wishart::{product_traces, single_traces, Sampler};
use infmul::{
    t_coeffs_from_moments, t_coeffs_via_transform, transform, DualScalar, DualSeries, TransformKind,
};
use infmul_bench::{fixture_law, rng};

fn partitions(c: &mut Criterion) {
    let mut g = c.benchmark_group("partitions");
    g.bench_function("nc/10", |b| b.iter(|| enumerate_nc(black_box(10)).unwrap()));
    for n in [6, 8] {
        g.bench_with_input(BenchmarkId::new("ncl", n), &n, |b, &n| {
            b.iter(|| enumerate_ncl(black_box(n)).unwrap())
        });
    }
    g.finish();
}

fn series(c: &mut Criterion) {
    let mut g = c.benchmark_group("series");
    for k in [8, 16] {
        let mut coeffs = vec![DualScalar::ZERO, DualScalar::real(1.5, 0.3)];
        coeffs.extend((2..=k).map(|i| DualScalar::real(1.0 / i as f64, -0.5 / i as f64)));
        let f = DualSeries::new(coeffs);
        g.bench_with_input(BenchmarkId::new("reversion", k), &f, |b, f| {
            b.iter(|| f.reversion().unwrap())
        });
        let law = fixture_law(1, k);
        g.bench_with_input(BenchmarkId::new("t_transform", k), &law, |b, law| {
            b.iter(|| transform(TransformKind::T, law).unwrap())
        });
    }
    g.finish();
}

fn t_coefficients(c: &mut Criterion) {
    let mut g = c.benchmark_group("t_coeffs");
    let law = fixture_law(2, 8);
    g.bench_function("ncl/8", |b| {
        b.iter(|| t_coeffs_from_moments(black_box(&law)).unwrap())
    });
    g.bench_function("transform/8", |b| {
        b.iter(|| t_coeffs_via_transform(black_box(&law)).unwrap())
    });
    g.finish();
}

fn oracles(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    let x = fixture_law(3, 8);
    let y = fixture_law(4, 8);
    g.bench_function("free/8", |b| {
        b.iter(|| oracle_free_product(&x, &y, 8).unwrap())
    });
    g.bench_function("monotone/8", |b| {
        b.iter(|| oracle_monotone_product(&x, &y, 8, MonotoneOrder::Xy).unwrap())
    });
    g.finish();
}

fn wishart(c: &mut Criterion) {
    let mut g = c.benchmark_group("wishart_trial");
    g.sample_size(20);
    let mut r = rng(5);
    g.bench_function("bidiagonal/400", |b| {
        b.iter(|| single_traces(402, 400, 4, Sampler::Bidiagonal, &mut r))
    });
    g.bench_function("dense/100", |b| {
        b.iter(|| single_traces(102, 100, 4, Sampler::Dense, &mut r))
    });
    g.bench_function("product/100", |b| {
        b.iter(|| product_traces(100, 100, 4, &mut r))
    });
    g.finish();
}

criterion_group!(
    benches,
    partitions,
    series,
    t_coefficients,
    oracles,
    wishart
);
criterion_main!(benches);
