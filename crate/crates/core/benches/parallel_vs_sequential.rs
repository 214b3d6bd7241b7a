//! Default rayon pool vs a one-thread pool on the data-parallel hot paths.
//! Build with `--no-default-features` to time the plain sequential code.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use priorint::known_variance::{AcceptanceFamily, Method};
use priorint::mc::{Simulation, SplineRule};
use priorint::spline::MonotoneCubicB;
use priorint::unknown_variance::Evaluator;
use priorint::ProblemConfig;
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pools() -> Vec<(String, ThreadPool)> {
    let default = ThreadPoolBuilder::new().build().unwrap();
    let label = format!("default-pool-{}", default.current_num_threads());
    vec![
        (label, default),
        ("single-thread".to_string(), ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn sample_b() -> MonotoneCubicB {
    let t = ProblemConfig::default().t_half_alpha();
    let bumps = [0.03, 0.2, 0.5, 0.52, 0.28, -0.02, -0.22, -0.27, -0.22, -0.11, -0.01, 0.0, 0.0, 0.0, 0.0];
    let mut values = vec![-8.0 + t];
    values.extend(bumps.iter().enumerate().map(|(i, d)| i as f64 - 7.0 + t + d));
    values.push(8.0 + t);
    MonotoneCubicB::build(&values, 8.0, t).unwrap()
}

fn family_build(c: &mut Criterion) {
    let cfg = ProblemConfig::default().with_grid(11.0, 0.05);
    let mut group = c.benchmark_group("family_build");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| pool.install(|| AcceptanceFamily::build(black_box(&cfg), Method::Mixed).unwrap()))
        });
    }
    group.finish();
}

fn coverage_profile(c: &mut Criterion) {
    let ev = Evaluator::new(24, 10).unwrap();
    let b = sample_b();
    let thetas: Vec<f64> = (0..=48).map(|k| k as f64 * 0.25).collect();
    let mut group = c.benchmark_group("coverage_profile");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |bench| {
            bench.iter(|| pool.install(|| ev.profile(black_box(&thetas), &b, 0.05).unwrap()))
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let b = sample_b();
    let rule = SplineRule::new(&b);
    let sim = Simulation::at_theta(1.0, 1.0, 24, 200_000, 1).unwrap();
    let mut group = c.benchmark_group("mc_coverage");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(&name), |bench| {
            bench.iter(|| pool.install(|| sim.coverage(black_box(&rule))))
        });
    }
    group.finish();
}

criterion_group!(benches, family_build, coverage_profile, monte_carlo);
criterion_main!(benches);
