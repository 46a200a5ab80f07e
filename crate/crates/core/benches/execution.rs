use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use milq_core::bench::{random_small_instance, run_scenarios, Scenario};
use milq_core::model::TimeMode;
use milq_core::par::Execution;
use milq_core::solvers::{solve_oracle_with, SolverOptions, Strategy};

const POLICIES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_5_jobs");
    group.sample_size(10);
    let instance = (0..)
        .map(|seed| random_small_instance(seed, 5, 2, 5, 40))
        .find(|i| i.jobs.len() == 5)
        .unwrap();
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solve_oracle_with(&instance, 5, exec).unwrap())
        });
    }
    group.finish();
}

fn scenarios(c: &mut Criterion) {
    let mut group = c.benchmark_group("heuristic_scenarios");
    let scenarios = [
        Scenario::paper_two_qpu(0, TimeMode::Integer),
        Scenario::paper_three_qpu(0, TimeMode::Integer),
    ];
    let strategies = [Strategy::Baseline, Strategy::Greedy];
    let options = SolverOptions::default();
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_scenarios(&scenarios, &strategies, &options, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, oracle, scenarios);
criterion_main!(benches);
