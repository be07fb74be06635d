use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cms_core::chamber::{ChamberPoint, RootSystem};
use cms_core::integrator::{integrate, IntegratorConfig};
use cms_core::par::Execution;
use cms_core::sde::{freezing_deviation, SdeConfig};
use cms_core::symflow::solve_trajectory;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sde_freezing(c: &mut Criterion) {
    let x0 = ChamberPoint::new(vec![1.0, -1.0], RootSystem::a(2).unwrap()).unwrap();
    let mut group = c.benchmark_group("sde_freezing");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = SdeConfig { n_paths: 256, dt: 1e-3, seed: 1, execution, ..Default::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| freezing_deviation(black_box(&x0), 1.0, &[10.0, 100.0], &cfg).unwrap())
        });
    }
    group.finish();
}

fn cross_engine_batch(c: &mut Criterion) {
    let starts: Vec<ChamberPoint> = (0..64)
        .map(|i| {
            let n = 2 + i % 6;
            let coords = (0..n).map(|k| (n - k) as f64 + 0.1 * (i as f64).sin()).collect();
            ChamberPoint::new(coords, RootSystem::b(n, 1.0).unwrap()).unwrap()
        })
        .collect();
    let times: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let cfg = IntegratorConfig::default();
    let mut group = c.benchmark_group("cross_engine_batch");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                execution.map_slice(&starts, |x0| {
                    let s = solve_trajectory(x0, &times).unwrap();
                    let k = integrate(x0, &times, &cfg).unwrap();
                    s.points
                        .iter()
                        .zip(&k.points)
                        .flat_map(|(p, q)| p.coords().iter().zip(q.coords()).map(|(a, b)| (a - b).abs()))
                        .fold(0.0, f64::max)
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sde_freezing, cross_engine_batch);
criterion_main!(benches);
