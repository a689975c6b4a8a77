//! Benchmarks the data-parallel sweep paths against their sequential
//! equivalents: the 20-design screen and a reduced trial battery.
//!
//! With the default `parallel` feature the battery runs on the rayon pool;
//! `--no-default-features` compiles the same API onto the sequential path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pouchsim::battery::run_battery;
use pouchsim::config::RunConfig;
use pouchsim::exec;
use pouchsim::screening::{screen_designs, ScreenTargets};

fn bench_screen(c: &mut Criterion) {
    let targets = ScreenTargets::default();
    c.bench_function("screen_20_designs", |b| {
        b.iter(|| screen_designs(&targets).unwrap());
    });
}

fn bench_battery(c: &mut Criterion) {
    let mut cfg = RunConfig::default();
    cfg.battery.trials_per_condition = 2; // 12 trials per run

    let mut group = c.benchmark_group("battery_12_trials");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("jobs", 1), &1usize, |b, &jobs| {
        b.iter(|| run_battery(&cfg, Some(jobs)).unwrap());
    });
    #[cfg(feature = "parallel")]
    {
        let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4);
        group.bench_with_input(BenchmarkId::new("jobs", n), &n, |b, &jobs| {
            b.iter(|| run_battery(&cfg, Some(jobs)).unwrap());
        });
    }
    group.finish();
}

fn bench_map_paths(c: &mut Criterion) {
    // the raw helper on a synthetic workload, parallel vs forced-sequential
    let work = |x: u64| -> f64 {
        let mut acc = 0.0f64;
        for i in 0..2_000u64 {
            acc += ((x.wrapping_mul(31).wrapping_add(i)) as f64).sqrt().sin();
        }
        acc
    };
    let items: Vec<u64> = (0..256).collect();
    let mut group = c.benchmark_group("exec_map");
    group.bench_function("feature_path", |b| {
        b.iter(|| exec::map(items.clone(), work));
    });
    group.bench_function("sequential", |b| {
        b.iter(|| exec::map_sequential(items.clone(), work));
    });
    group.finish();
}

criterion_group!(benches, bench_screen, bench_battery, bench_map_paths);
criterion_main!(benches);
