//! Sequential against data-parallel execution for the three fan-out points:
//! multi-start solves, two-chain sweeps and perturbation ensembles.

use std::hint::black_box;
use std::sync::Arc;
use std::time::Duration;

use confinement_core::branch::{sweep, SweepOptions};
use confinement_core::dynamics::{collocation, run_ensemble, EvolutionConfig, Perturbation, PerturbationShape};
use confinement_core::ground_state::{solve_ground_state, SolverOptions, Start};
use confinement_core::{Discretization, Execution, GridSpec, ModelParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn multistart(c: &mut Criterion) {
    let params = ModelParams::new(4.0, 1.0).unwrap();
    let grid = Arc::new(Discretization::from_spec(GridSpec::adapted(32, 128, &params)).unwrap());
    let mut group = c.benchmark_group("multistart");
    group.sample_size(10);
    for exec in MODES {
        let opts = SolverOptions { exec, ..SolverOptions::default() };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &opts, |b, opts| {
            b.iter(|| solve_ground_state(&params, grid.clone(), Start::MultiStart, black_box(opts)).unwrap())
        });
    }
    group.finish();
}

fn branch_sweep(c: &mut Criterion) {
    let lambdas = [-5.0, -1.0, 0.5, 1.5, 1.9];
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for exec in MODES {
        let opts = SweepOptions {
            exec,
            solver: SolverOptions { exec, ..SolverOptions::default() },
            eigenvalues: false,
            ..SweepOptions::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &opts, |b, opts| {
            b.iter(|| sweep(4.0, black_box(&lambdas), opts).unwrap())
        });
    }
    group.finish();
}

fn ensemble(c: &mut Criterion) {
    let params = ModelParams::new(4.0, 1.5).unwrap();
    let grid = Arc::new(Discretization::from_spec(collocation(GridSpec::adapted(32, 128, &params))).unwrap());
    let u = solve_ground_state(&params, grid, Start::MultiStart, &SolverOptions::default()).unwrap().u;
    let cfgs: Vec<EvolutionConfig> = (0..8)
        .map(|seed| EvolutionConfig {
            dt: 2e-3,
            t_final: 0.4,
            perturbation: Perturbation { amplitude: 0.01, shape: PerturbationShape::Random, seed },
            ..EvolutionConfig::default()
        })
        .collect();
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| run_ensemble(&u, &params, black_box(cfgs.clone()), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, multistart, branch_sweep, ensemble);
criterion_main!(benches);
