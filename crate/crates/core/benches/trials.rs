use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entangled::harness::{run_error_sweep, EstimatorKind, MRule, SweepConfig};
use entangled::instances::{case1_params, NoiseConfig};
use entangled::lowerbound::run_sign_error_experiment;
use entangled::Execution;

fn sweep_config() -> SweepConfig {
    SweepConfig {
        n_grid: vec![512, 1024],
        m_rule: MRule::Threshold { c: 4.0 },
        estimators: vec![EstimatorKind::IterTrunc, EstimatorKind::Median],
        noise: NoiseConfig::Constant { level: 1e6 },
        trials: 16,
        seed: 1,
        inner_scale: 1.0,
        out: None,
        mu_star: 0.0,
        sigma_signal: 1.0,
        step_budget: Some(u64::MAX),
        record_wall_time: false,
    }
}

fn bench_sweep(c: &mut Criterion) {
    let cfg = sweep_config();
    let mut group = c.benchmark_group("error_sweep");
    group.sample_size(10);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_error_sweep(black_box(&cfg), exec).unwrap())
        });
    }
    group.finish();
}

fn bench_sign_error(c: &mut Criterion) {
    let prior = case1_params(10_000, 19, 10.0, 0.1).unwrap().prior;
    let mut group = c.benchmark_group("sign_error");
    group.sample_size(10);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_sign_error_experiment(black_box(&prior), 10_000, 64, 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_sign_error);
criterion_main!(benches);
