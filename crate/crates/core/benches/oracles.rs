//! Parallel against sequential execution of the Monte Carlo harnesses.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nlwitness::covariance::{default_basis, optimize_q, Budget};
use nlwitness::matcore::DimPair;
use nlwitness::nonlinear::example_f2_bell;
use nlwitness::par::Execution;
use nlwitness::states::{bell_states, singlet};
use nlwitness::survey::{hierarchy_survey, separable_oracle_min};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn hierarchy(c: &mut Criterion) {
    let phi = bell_states()[0].clone();
    let mut g = c.benchmark_group("hierarchy_survey");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 2000), &exec, |b, &exec| {
            b.iter(|| hierarchy_survey(black_box(&phi), 2000, 1, None, 1e-9, exec).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let f2 = example_f2_bell().unwrap();
    let mut g = c.benchmark_group("separable_oracle_min");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 2000), &exec, |b, &exec| {
            b.iter(|| separable_oracle_min(DimPair::qubits(), 2000, 8, 1, exec, |r| f2.evaluate(r)).unwrap())
        });
    }
    g.finish();
}

fn covariance_search(c: &mut Criterion) {
    let rho = singlet();
    let p = bell_states()[0].projector();
    let basis = default_basis(DimPair::qubits());
    let mut g = c.benchmark_group("optimize_q");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 500), &exec, |b, &exec| {
            let budget = Budget {
                samples: 500,
                refine_steps: 20,
            };
            b.iter(|| optimize_q(black_box(&rho), &p, &basis, budget, 3, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, hierarchy, oracle, covariance_search);
criterion_main!(benches);
