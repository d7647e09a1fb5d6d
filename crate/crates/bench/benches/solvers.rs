use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use pvi_bench::fixture;
use pvi_core::assembly::assemble_all;
use pvi_core::control::{optimize, OptParams};
use pvi_core::mesh::Mesh;
use pvi_core::oracle::{solve_step_oracle, DenseStepProblem};
use pvi_core::state::{solve_state, NewtonParams, StepContext, Variant};

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for n in [8usize, 16, 32] {
        let mesh = Mesh::unit_square(n, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &mesh, |b, mesh| {
            b.iter(|| assemble_all(black_box(mesh)).unwrap());
        });
    }
    group.finish();
}

fn bench_state_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("state_solve");
    let newton = NewtonParams::default();
    for n in [8usize, 16, 32] {
        let fx = fixture(n, 16);
        group.bench_with_input(BenchmarkId::new("dirichlet", n), &fx, |b, fx| {
            b.iter(|| {
                solve_state(
                    black_box(&fx.mesh),
                    &fx.ops,
                    &fx.data,
                    &fx.control,
                    Variant::Dirichlet,
                    &newton,
                )
                .unwrap()
            });
        });
        group.bench_with_input(BenchmarkId::new("robin_1000", n), &fx, |b, fx| {
            b.iter(|| {
                solve_state(
                    black_box(&fx.mesh),
                    &fx.ops,
                    &fx.data,
                    &fx.control,
                    Variant::Robin { h: 1000.0 },
                    &newton,
                )
                .unwrap()
            });
        });
    }
    group.finish();
}

fn bench_oracle_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_step");
    for n in [4usize, 8] {
        let fx = fixture(n, 4);
        let ctx = StepContext::new(&fx.mesh, &fx.ops, &fx.data, Variant::Dirichlet);
        let u_prev = vec![0.0; fx.ops.n_nodes];
        let prob = DenseStepProblem::from_step(&fx.ops, &fx.data, &ctx, &u_prev, &fx.control.values[0]);
        group.bench_with_input(BenchmarkId::from_parameter(n), &prob, |b, prob| {
            b.iter(|| solve_step_oracle(black_box(prob)).unwrap());
        });
    }
    group.finish();
}

fn bench_optimize(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimize");
    group.sample_size(10);
    let newton = NewtonParams::default();
    let opt = OptParams::default();
    let fx = fixture(8, 16);
    group.bench_function("dirichlet_8", |b| {
        b.iter(|| {
            optimize(
                black_box(&fx.mesh),
                &fx.ops,
                &fx.data,
                Variant::Dirichlet,
                &fx.control,
                &newton,
                &opt,
            )
            .unwrap()
        });
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_assembly,
    bench_state_solve,
    bench_oracle_step,
    bench_optimize
);
criterion_main!(benches);
