use cofo_core::algorithms::gdy;
use cofo_core::instances::{gen_random_ashg, WeightDist};
use cofo_core::oracles::{
    enumerate_orders, max_weight_matching, mc_expected_welfare, optimal_partition,
};
use cofo_core::{Mode, OnlineAlgorithm};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn offline(c: &mut Criterion) {
    let mut group = c.benchmark_group("offline");
    group.sample_size(10);
    for n in [6usize, 9, 11] {
        let game = gen_random_ashg(n, &WeightDist::Int(10), 3);
        group.bench_with_input(BenchmarkId::new("optimal_partition", n), &game, |b, g| {
            b.iter(|| optimal_partition(black_box(g)).unwrap())
        });
    }
    for n in [8usize, 16, 20] {
        let game = gen_random_ashg(n, &WeightDist::Int(10), 3);
        group.bench_with_input(BenchmarkId::new("max_weight_matching", n), &game, |b, g| {
            b.iter(|| max_weight_matching(black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn random_arrival(c: &mut Criterion) {
    let factory = || Box::new(gdy()) as Box<dyn OnlineAlgorithm>;
    let mut group = c.benchmark_group("random_arrival");
    group.sample_size(10);
    let game = gen_random_ashg(7, &WeightDist::Int(10), 5);
    group.bench_function("enumerate_7", |b| {
        b.iter(|| enumerate_orders(black_box(&game), &factory, Mode::Standard, None).unwrap())
    });
    let game = gen_random_ashg(16, &WeightDist::Int(10), 5);
    group.bench_function("mc_16x1000", |b| {
        b.iter(|| mc_expected_welfare(black_box(&game), &factory, Mode::Standard, 1000, 9).unwrap())
    });
    group.finish();
}

criterion_group!(benches, offline, random_arrival);
criterion_main!(benches);
