use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use identikit::independence::{hsic_test, TestConfig};
use identikit::nica::{mlp_gradient, FeatureExtractor};
use identikit::{estimate_ica, hsic_statistic, rng, whiten, IcaConfig};
use identikit_bench::{gaussian_pair, labelled_batch, mixed_laplace};

fn bench_whiten(c: &mut Criterion) {
    let mut group = c.benchmark_group("whiten");
    for n_vars in [2, 8] {
        let data = mixed_laplace(n_vars, 10_000, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n_vars), &data, |b, d| {
            b.iter(|| whiten(black_box(d)).unwrap())
        });
    }
    group.finish();
}

fn bench_fastica(c: &mut Criterion) {
    let data = mixed_laplace(4, 5000, 2);
    let cfg = IcaConfig::default();
    c.bench_function("fastica/4x5000", |b| {
        b.iter(|| estimate_ica(black_box(&data), &cfg).unwrap())
    });
}

fn bench_hsic(c: &mut Criterion) {
    let mut group = c.benchmark_group("hsic");
    for n in [200, 1000] {
        let (x, y) = gaussian_pair(n, 3);
        group.bench_with_input(BenchmarkId::new("statistic", n), &n, |b, _| {
            b.iter(|| hsic_statistic(black_box(&x), black_box(&y), 1.0, 1.0).unwrap())
        });
    }
    let (x, y) = gaussian_pair(500, 4);
    let cfg = TestConfig {
        n_permutations: 100,
        ..Default::default()
    };
    group.sample_size(10);
    group.bench_function("test/500x100", |b| {
        b.iter(|| hsic_test(black_box(&x), black_box(&y), &cfg).unwrap())
    });
    group.finish();
}

fn bench_mlp_gradient(c: &mut Criterion) {
    let ex = FeatureExtractor::new(&[2, 32, 32, 2], 40, &mut rng::rng(5)).unwrap();
    let (batch, labels) = labelled_batch(128, 2, 40, 6);
    c.bench_function("mlp_gradient/2-32-32-2x128", |b| {
        b.iter(|| mlp_gradient(black_box(&ex), black_box(&batch), &labels).unwrap())
    });
}

criterion_group!(
    benches,
    bench_whiten,
    bench_fastica,
    bench_hsic,
    bench_mlp_gradient
);
criterion_main!(benches);
