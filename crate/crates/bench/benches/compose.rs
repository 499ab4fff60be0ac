use std::hint::black_box;

use compopt::experiment::three_network_instance;
use compopt::flownet::FlowNet;
use compopt::{mix64, oapply, pushout, FinFunction};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

/// Deterministic pseudo-random map `[dom] → [codom]`.
fn scrambled(dom: usize, codom: usize, seed: u64) -> FinFunction {
    let table = (0..dom as u64).map(|i| (mix64(seed, i) % codom as u64) as usize).collect();
    FinFunction::new(table, codom).unwrap()
}

fn pushouts(c: &mut Criterion) {
    let mut group = c.benchmark_group("pushout");
    for n in [100, 1_000, 10_000] {
        let m = scrambled(n, n, 1);
        let l = scrambled(n, n / 2, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| pushout(black_box(&m), black_box(&l)).unwrap())
        });
    }
    group.finish();
}

fn compose_networks(c: &mut Criterion) {
    let mut group = c.benchmark_group("oapply_flownet");
    for n in [40, 150] {
        let (d, nets) = three_network_instance(n, 0.2, 0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| oapply(&FlowNet, black_box(&d), black_box(&nets)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pushouts, compose_networks);
criterion_main!(benches);
