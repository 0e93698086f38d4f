use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use retiming::elimination::{solve_with_objective, ObjectiveKind};
use retiming::generators::{cable_robot_problem, simple_benchmark, CableRobotSpec};

fn bench_min_time(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_min_time");
    for n in [1_000usize, 10_000, 100_000] {
        let problem = simple_benchmark(n, false);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &problem, |b, p| {
            b.iter(|| solve_with_objective(p, ObjectiveKind::MinimumTime).unwrap())
        });
    }
    group.finish();
}

fn bench_quadratic(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_quadratic");
    for n in [1_000usize, 10_000, 100_000] {
        let problem = simple_benchmark(n, true);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &problem, |b, p| {
            b.iter(|| solve_with_objective(p, ObjectiveKind::Quadratic).unwrap())
        });
    }
    group.finish();
}

fn bench_cable_demo(c: &mut Criterion) {
    let problem = cable_robot_problem(&CableRobotSpec::star_demo(1000)).unwrap();
    c.bench_function("cable_demo_1000", |b| {
        b.iter(|| solve_with_objective(&problem, ObjectiveKind::Quadratic).unwrap())
    });
}

criterion_group!(benches, bench_min_time, bench_quadratic, bench_cable_demo);
criterion_main!(benches);
