//! Sequential against data-parallel fan-out for the two batch shapes the
//! harness uses: independent optimizations and independent perturbation
//! samples. With one core available both arms run the same path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use insitu_core::exec::Workers;
use insitu_core::harness::{perturbation_scaling, run_trials, Placement, TrialConfig};
use insitu_core::{CouplingKind, OptimizerConfig, SpinSystem, Topology};
use std::hint::black_box;

fn arms() -> [(&'static str, Workers); 2] {
    [("sequential", Workers::SEQUENTIAL), ("parallel", Workers::available())]
}

fn trials(c: &mut Criterion) {
    let cfg = TrialConfig {
        system: SpinSystem::new(3, Topology::Chain, CouplingKind::Ising).unwrap(),
        placement: Placement::Nearest,
        t_gate: std::f64::consts::PI,
        n_ts: 12,
        optimizer: OptimizerConfig {
            f_targ: 0.999,
            max_upds: 25,
            ..OptimizerConfig::default()
        },
    };
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    for (name, workers) in arms() {
        group.bench_with_input(BenchmarkId::new(name, workers.count()), &workers, |b, &w| {
            b.iter(|| black_box(run_trials(&cfg, 8, 1, w).unwrap()))
        });
    }
    group.finish();
}

fn perturbation_samples(c: &mut Criterion) {
    let mut group = c.benchmark_group("perturbation_samples");
    group.sample_size(10);
    for (name, workers) in arms() {
        group.bench_with_input(BenchmarkId::new(name, workers.count()), &workers, |b, &w| {
            b.iter(|| black_box(perturbation_scaling(&[5], 0.1, 32, 3, w).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, trials, perturbation_samples);
criterion_main!(benches);
