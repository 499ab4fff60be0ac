use std::hint::black_box;

use compopt::dynamics::ExecutionMode;
use compopt::experiment::three_network_instance;
use compopt::flownet::{dual_decomposition_hierarchical, dual_decomposition_standard, DualConfig, IncidenceStorage};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn standard_vs_hierarchical(c: &mut Criterion) {
    let mut group = c.benchmark_group("dual_decomposition");
    group.sample_size(20);
    for n in [20, 40, 80] {
        let (d, nets) = three_network_instance(n, 0.2, 0).unwrap();
        let cfg = DualConfig::default();
        group.bench_with_input(BenchmarkId::new("standard", n), &n, |b, _| {
            b.iter(|| dual_decomposition_standard(black_box(&d), black_box(&nets), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("hierarchical", n), &n, |b, _| {
            b.iter(|| dual_decomposition_hierarchical(black_box(&d), black_box(&nets), &cfg).unwrap())
        });
        let sparse = DualConfig { storage: IncidenceStorage::Sparse, ..DualConfig::default() };
        group.bench_with_input(BenchmarkId::new("standard_sparse", n), &n, |b, _| {
            b.iter(|| dual_decomposition_standard(black_box(&d), black_box(&nets), &sparse).unwrap())
        });
    }
    group.finish();
}

fn parallel_hierarchical(c: &mut Criterion) {
    let (d, nets) = three_network_instance(150, 0.2, 0).unwrap();
    let cfg = DualConfig { mode: ExecutionMode::Parallel, ..DualConfig::default() };
    c.bench_function("hierarchical_parallel_150", |b| {
        b.iter(|| dual_decomposition_hierarchical(&d, &nets, &cfg).unwrap())
    });
}

criterion_group!(benches, standard_vs_hierarchical, parallel_hierarchical);
criterion_main!(benches);
