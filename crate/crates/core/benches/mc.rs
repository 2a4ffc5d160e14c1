//! Monte Carlo failure-rate estimation, sequential against rayon.
//!
//! Both modes produce the same estimate; only wall time differs. Without the
//! `parallel` feature the two groups measure the same sequential loop.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use trustvote_core::ldp::{mc_failure_rate, McSettings};
use trustvote_core::Execution;

fn failure_rate(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_failure_rate");
    group.sample_size(10);
    for replicas in [10_000u64, 100_000] {
        group.throughput(Throughput::Elements(replicas));
        for exec in [Execution::Sequential, Execution::Parallel] {
            let settings = McSettings {
                execution: exec,
                ..McSettings::new(2000, replicas, 1)
            };
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), replicas), &settings, |b, s| {
                b.iter(|| mc_failure_rate(2.0, 1.0, black_box(4.0), s).unwrap())
            });
        }
    }
    group.finish();
}

fn pruning(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_pruning");
    group.sample_size(10);
    for prune in [true, false] {
        let settings = McSettings {
            prune,
            execution: Execution::Sequential,
            ..McSettings::new(2000, 5_000, 1)
        };
        group.bench_function(if prune { "pruned" } else { "full_horizon" }, |b| {
            b.iter(|| mc_failure_rate(2.0, 1.0, black_box(4.0), &settings).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, failure_rate, pruning);
criterion_main!(benches);
