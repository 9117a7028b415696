use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hypernibble::instances::{gen_lists, gen_uniform, make_triangle_free};
use hypernibble::nibble::{init_state, observed_delta, q, run_round, NibbleConfig, Params, Relaxation};
use hypernibble::{f_reduce, ReductionPolicy};
use std::hint::black_box;

fn triangles(c: &mut Criterion) {
    let dense = gen_uniform(200, 3, 600, 1).unwrap();
    let free = make_triangle_free(&dense, 1);
    c.bench_function("find_triangle/dense", |b| b.iter(|| black_box(&dense).find_triangle()));
    c.bench_function("find_triangle/free", |b| b.iter(|| black_box(&free).find_triangle()));
}

fn reduce(c: &mut Criterion) {
    let h = gen_uniform(60, 4, 800, 2).unwrap();
    let policy = ReductionPolicy::geometric(4, 2.0).unwrap();
    c.bench_function("f_reduce/n60_m800", |b| {
        b.iter(|| f_reduce(black_box(&h), &policy).unwrap())
    });
}

fn q_exact(c: &mut Criterion) {
    // Twenty pairs in a chain, one connected component.
    let chain: Vec<Vec<usize>> = (0..20).map(|i| vec![i, i + 1]).collect();
    let disjoint: Vec<Vec<usize>> = (0..20).map(|i| vec![2 * i, 2 * i + 1]).collect();
    c.bench_function("q_exact/chain20", |b| b.iter(|| q::exact(black_box(&chain), 0.1)));
    c.bench_function("q_exact/disjoint20", |b| b.iter(|| q::exact(black_box(&disjoint), 0.1)));
}

fn round(c: &mut Criterion) {
    let h = make_triangle_free(&gen_uniform(2000, 3, 2000, 3).unwrap(), 3);
    let lists = gen_lists(2000, 40, 50, 3).unwrap();
    let relax = Relaxation {
        phi1: Some(0.25),
        colors: Some(40),
        ..Default::default()
    };
    let params = Params::relaxed(3, observed_delta(&h, &lists, 3, 40, 0.25), relax).unwrap();
    let state = init_state(&h, &lists, &params, NibbleConfig::default(), 3).unwrap();
    let mut group = c.benchmark_group("run_round");
    group.sample_size(20);
    group.bench_function("n2000_c40", |b| {
        b.iter_batched(|| state.clone(), |s| run_round(&s).unwrap(), BatchSize::LargeInput)
    });
    group.finish();
}

criterion_group!(benches, triangles, reduce, q_exact, round);
criterion_main!(benches);
