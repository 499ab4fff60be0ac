//! Random-network generator statistics and benchmark determinism.

mod common;

use std::time::Instant;

use compopt::dynamics::ExecutionMode;
use compopt::experiment::{
    gen_er_flownet, read_rows, run_benchmark, three_network_instance, write_rows, BenchConfig, BenchMode, BenchRow,
};
use compopt::flownet::{dual_decomposition_hierarchical, DualConfig};

#[test]
fn er_edge_count_matches_binomial_mean() {
    // E ~ Bin(C(80, 2), 0.2): mean 632, sd ≈ 22.5; the mean of 100 draws
    // has sd ≈ 2.25. Conditioning on connectivity barely moves it at p = 0.2.
    let trials = 100;
    let total: usize = (0..trials)
        .map(|seed| gen_er_flownet(80, 0.2, 0, &mut common::rng(seed)).unwrap().payload.edges())
        .sum();
    let mean = total as f64 / trials as f64;
    let sd = (3160.0 * 0.2 * 0.8f64).sqrt() / (trials as f64).sqrt();
    assert!((mean - 632.0).abs() <= 3.0 * sd, "mean {mean}");
}

fn strip_time(rows: &[BenchRow]) -> Vec<BenchRow> {
    rows.iter().cloned().map(|r| BenchRow { wall_ms: 0.0, ..r }).collect()
}

#[test]
fn benchmark_is_deterministic_per_seed() {
    let cfg = BenchConfig {
        seed: 42,
        nodes_per_subgraph: 20,
        ..BenchConfig::default()
    };
    let a = run_benchmark(&cfg).unwrap();
    let b = run_benchmark(&cfg).unwrap();
    assert_eq!(strip_time(&a), strip_time(&b));
    let c = run_benchmark(&BenchConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(strip_time(&a), strip_time(&c));
}

#[test]
fn smallest_config_is_fast() {
    let t = Instant::now();
    let rows = run_benchmark(&BenchConfig {
        nodes_per_subgraph: 3,
        edge_prob: 0.9,
        ..BenchConfig::default()
    })
    .unwrap();
    assert!(t.elapsed().as_secs_f64() < 1.0);
    assert!(rows[0].lambda_discrepancy.unwrap() <= 1e-8);
}

#[test]
fn single_mode_rows_leave_discrepancy_empty() {
    for mode in [BenchMode::Standard, BenchMode::Hierarchical] {
        let rows = run_benchmark(&BenchConfig {
            nodes_per_subgraph: 8,
            mode,
            ..BenchConfig::default()
        })
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mode, mode);
        assert_eq!(rows[0].lambda_discrepancy, None);
    }
}

#[test]
fn csv_rows_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let rows = run_benchmark(&BenchConfig {
        nodes_per_subgraph: 8,
        output_path: Some(path.clone()),
        ..BenchConfig::default()
    })
    .unwrap();
    let parsed = read_rows(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(parsed, rows);
    let mut buf = Vec::new();
    write_rows(&mut buf, &[]).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap().trim(),
        "mode,nodes,p,seed,iters,wall_ms,residual,final_dual_value,lambda_discrepancy"
    );
}

#[test]
fn parallel_hierarchical_matches_serial() {
    let (d, nets) = three_network_instance(30, 0.2, 5).unwrap();
    let serial = dual_decomposition_hierarchical(&d, &nets, &DualConfig::default()).unwrap();
    let parallel = dual_decomposition_hierarchical(
        &d,
        &nets,
        &DualConfig {
            mode: ExecutionMode::Parallel,
            ..DualConfig::default()
        },
    )
    .unwrap();
    assert_eq!(serial, parallel);
}
