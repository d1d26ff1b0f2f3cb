use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use grc::capacity::{capacity_budget, CapacityOptions, FunctionFamily};
use grc::*;

fn chain8() -> Reservoir {
    Reservoir::new(&OscillatorNetwork::chain(8, 0.25, 0.1, 7).unwrap(), 59.6).unwrap()
}

fn propagator(c: &mut Criterion) {
    let mut group = c.benchmark_group("propagator");
    for n in [4usize, 8, 16] {
        let net = OscillatorNetwork::chain(n, 0.25, 0.1, n - 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &net, |b, net| {
            b.iter(|| build_propagator(black_box(net), 59.6).unwrap())
        });
    }
    group.finish();
}

fn trajectory(c: &mut Criterion) {
    let res = chain8();
    let inputs = SeededRng::new(0, 1).uniform_vec(2000, -1.0, 1.0);
    let mut group = c.benchmark_group("trajectory_2000");
    for (name, scheme, kind) in [
        ("first_moments", EncodingScheme::coherent_amplitude(), ObservableKind::FirstMoments),
        ("covariances", EncodingScheme::SqueezePhase, ObservableKind::Covariances),
    ] {
        group.bench_function(name, |b| b.iter(|| res.run(black_box(&inputs), &scheme, 100, kind).unwrap()));
    }
    group.finish();
}

fn capacity(c: &mut Criterion) {
    let res = chain8();
    let inputs = SeededRng::new(0, 2).uniform_vec(6000, -1.0, 1.0);
    let traj = res.run(&inputs, &EncodingScheme::coherent_amplitude(), 1000, ObservableKind::FirstMoments).unwrap();
    let options = CapacityOptions { max_degree: 3, surrogates: 20, ..CapacityOptions::default() };
    let mut group = c.benchmark_group("capacity");
    group.sample_size(10);
    group.bench_function("estimator", |b| b.iter(|| CapacityEstimator::new(black_box(&traj)).unwrap()));
    group.bench_function("single_delay_budget", |b| {
        b.iter(|| capacity_budget(&traj, &inputs, FunctionFamily::SingleDelay, 4, &options, 0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, propagator, trajectory, capacity);
criterion_main!(benches);
