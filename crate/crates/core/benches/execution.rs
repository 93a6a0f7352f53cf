use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hpbandit::exec::Execution;
use hpbandit::freedman::{mc_validate_freedman, BanditReplay};
use hpbandit::types::LearningRate;

fn freedman_trials(c: &mut Criterion) {
    let process = BanditReplay::stochastic(5, 200, 0.3, 0.2, LearningRate::new(0.1).unwrap(), 7);
    let mut group = c.benchmark_group("freedman_trials");
    group.sample_size(10);
    for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::new(name, 200), &execution, |b, &execution| {
            b.iter(|| mc_validate_freedman(&process, 0.05, 200, 11, execution).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, freedman_trials);
criterion_main!(benches);
