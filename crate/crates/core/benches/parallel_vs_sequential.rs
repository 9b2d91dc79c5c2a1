//! One-thread rayon pool against the default pool on the three heavy
//! loops. Build with `--no-default-features` to time the plain-iterator
//! fallback instead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rayon::{ThreadPool, ThreadPoolBuilder};
use superstat::mcmc::run_chains;
use superstat::model_select::{bf_series_pooled, fit_hyperparameters, Family};
use superstat::synthetic::{gen_superstat, GeneratorConfig};
use superstat::{McmcConfig, ModelSpec, Pooling, ReturnSeries};

fn fixture() -> ReturnSeries {
    let model = ModelSpec::iga(3.0, 2.0).unwrap();
    gen_superstat(&GeneratorConfig { model, n_points: 10_000, block_length: 100, seed: 1 })
        .unwrap()
        .returns
}

fn pools() -> [(&'static str, ThreadPool); 2] {
    [
        ("1 thread", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("default", ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn bench(c: &mut Criterion) {
    let data = fixture();
    let m1 = ModelSpec::iga(3.0, 2.0).unwrap();
    let m2 = ModelSpec::logn(1.0).unwrap();

    let mut g = c.benchmark_group("bf_series");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(name, |b| {
            b.iter(|| {
                pool.install(|| {
                    bf_series_pooled(black_box(&data), &m1, &m2, Pooling::Blocks(100), 50, 2_000, 3)
                        .unwrap()
                })
            })
        });
    }
    g.finish();

    let mut g = c.benchmark_group("fit_hyperparameters");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(name, |b| {
            b.iter(|| {
                pool.install(|| {
                    fit_hyperparameters(black_box(&data), Family::InverseGamma, 0.0, Pooling::Blocks(100), 2_000, 4)
                        .unwrap()
                })
            })
        });
    }
    g.finish();

    let mut g = c.benchmark_group("run_chains");
    g.sample_size(10);
    let cfg = McmcConfig::standard(50_000, 5_000, 5);
    for (name, pool) in pools() {
        g.bench_function(name, |b| {
            b.iter(|| pool.install(|| run_chains(black_box(&data), &m1, &cfg, 8).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
