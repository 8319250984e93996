//! Compares the data-parallel simulator against single-threaded execution.
//!
//! With the default `parallel` feature the same code runs in the global
//! rayon pool and in a one-thread pool; built with
//! `--no-default-features` the parallel variant is skipped and the
//! baseline measures the truly sequential code path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qaoa_cluster::graph::{random_weights, topology_19q};
use qaoa_cluster::rng::split_rng;
use qaoa_cluster::sim::{QaoaAngles, QaoaSimulator};
use qaoa_cluster::solver::{solve_prepared, PreparedInstance, SolveConfig};

fn prepare_once(sim: &QaoaSimulator, angles: &QaoaAngles) -> f64 {
    let state = sim.prepare(angles);
    state.probabilities().iter().sum()
}

fn bench_prepare(c: &mut Criterion) {
    let g = random_weights(&topology_19q(), 11);
    let sim = QaoaSimulator::new(&g).expect("19 qubits fit");
    let angles = QaoaAngles::new(vec![0.7], vec![0.4]).expect("valid");

    let mut group = c.benchmark_group("state_preparation_19q");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("threads", "default"), |b| {
        b.iter(|| prepare_once(&sim, &angles))
    });
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool");
        group.bench_function(BenchmarkId::new("threads", "1"), |b| {
            b.iter(|| pool.install(|| prepare_once(&sim, &angles)))
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let g = random_weights(&topology_19q(), 11);
    let inst = PreparedInstance::new(&g, true).expect("valid instance");
    let config = SolveConfig { budget: 3, shots: 500, ..SolveConfig::default() };

    let mut group = c.benchmark_group("solve_19q_3_steps");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("threads", "default"), |b| {
        b.iter(|| {
            let mut rng = split_rng(5, 0);
            solve_prepared(&inst, &config, &mut rng).expect("solve succeeds")
        })
    });
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool");
        group.bench_function(BenchmarkId::new("threads", "1"), |b| {
            b.iter(|| {
                pool.install(|| {
                    let mut rng = split_rng(5, 0);
                    solve_prepared(&inst, &config, &mut rng).expect("solve succeeds")
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_prepare, bench_solve);
criterion_main!(benches);
