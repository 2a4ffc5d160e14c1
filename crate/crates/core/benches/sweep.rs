//! Seed sweeps of the voting simulation, sequential against rayon.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use trustvote_core::sim::{run_seeds, ScenarioConfig};
use trustvote_core::Execution;

fn scenario() -> ScenarioConfig {
    // the rewards scenario at a third of its length
    ScenarioConfig::new(20, 5, 30, 0)
}

fn seed_sweep(c: &mut Criterion) {
    let config = scenario();
    let mut group = c.benchmark_group("run_seeds");
    group.sample_size(10);
    for count in [4u64, 16] {
        let seeds: Vec<u64> = (0..count).collect();
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), count), &seeds, |b, seeds| {
                b.iter(|| run_seeds(&config, seeds, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, seed_sweep);
criterion_main!(benches);
