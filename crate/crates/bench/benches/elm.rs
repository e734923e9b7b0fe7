use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mlelm_bench::{dataset, random_matrix, SHAPES};
use mlelm_core::elm::train;
use mlelm_core::linalg::pseudoinverse;
use mlelm_core::multilabel::predict_labels;
use mlelm_core::ElmConfig;

fn bench_train(c: &mut Criterion) {
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for (name, n, d, m) in SHAPES {
        let ds = dataset(n, d, m);
        let config = ElmConfig::new(500);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| train(&ds, &config).unwrap()));
    }
    group.finish();
}

fn bench_predict(c: &mut Criterion) {
    let mut group = c.benchmark_group("predict");
    for (name, n, d, m) in SHAPES {
        let ds = dataset(n, d, m);
        let model = train(&ds, &ElmConfig::new(500)).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| predict_labels(&model, ds.features()).unwrap())
        });
    }
    group.finish();
}

fn bench_pseudoinverse(c: &mut Criterion) {
    let mut group = c.benchmark_group("pseudoinverse");
    for (rows, cols) in [(200, 50), (1000, 250), (250, 1000)] {
        let a = random_matrix(rows, cols, 3);
        group.bench_function(BenchmarkId::from_parameter(format!("{rows}x{cols}")), |b| {
            b.iter(|| pseudoinverse(&a, 1e-8).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_train, bench_predict, bench_pseudoinverse);
criterion_main!(benches);
