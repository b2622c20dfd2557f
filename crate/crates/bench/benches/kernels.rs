use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use netdyn_bench::{cycle_transport, path_laplacian, random_digraph, ring_road, smooth_field};
use netdyn_core::diffusion::{dirichlet_grid_solve, HeatSolver};
use netdyn_core::graph::operator_suite;
use netdyn_core::measures::louvain;
use netdyn_core::traffic::step;
use netdyn_core::transport::{EvolveOptions, Scheme, Stepper};

fn operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator_suite");
    for n in [20, 60] {
        let g = random_digraph(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| b.iter(|| operator_suite(g)));
    }
    group.finish();
}

fn communities(c: &mut Criterion) {
    let mut group = c.benchmark_group("louvain");
    for n in [100, 1000] {
        let g = random_digraph(n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| b.iter(|| louvain(g)));
    }
    group.finish();
}

fn transport_step(c: &mut Criterion) {
    let ts = cycle_transport(16);
    let f = smooth_field(16, 256);
    let mut group = c.benchmark_group("transport_step");
    for (name, scheme) in [("exact", Scheme::Exact), ("upwind", Scheme::Upwind)] {
        let opts = EvolveOptions { scheme, ..Default::default() };
        group.bench_function(name, |b| {
            b.iter_batched_ref(|| Stepper::new(&ts, &f, &opts).unwrap(), |s| s.step(), BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn heat_step(c: &mut Criterion) {
    let lap = path_laplacian(33);
    let f = smooth_field(32, 64);
    c.bench_function("heat_step", |b| {
        b.iter_batched_ref(|| HeatSolver::new(&lap, &f, 1e-4).unwrap(), |s| s.step(), BatchSize::SmallInput)
    });
}

fn grid_solve(c: &mut Criterion) {
    let pi = std::f64::consts::PI;
    let f = move |x: f64, y: f64| 2.0 * pi * pi * (pi * x).sin() * (pi * y).sin();
    let mut group = c.benchmark_group("dirichlet_grid_solve");
    group.sample_size(10);
    for n in [16, 32] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| dirichlet_grid_solve(n, &f).unwrap()));
    }
    group.finish();
}

fn traffic_step(c: &mut Criterion) {
    let (net, state) = ring_road(8, 100);
    c.bench_function("traffic_step", |b| {
        b.iter_batched_ref(|| state.clone(), |s| step(&net, s, &[]).unwrap(), BatchSize::SmallInput)
    });
}

criterion_group!(kernels, operators, communities, transport_step, heat_step, grid_solve, traffic_step);
criterion_main!(kernels);
