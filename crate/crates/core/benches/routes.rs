//! Sequential against data-parallel execution of the Monte Carlo route and
//! the double forward transform. Without the `parallel` feature both arms run
//! sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fracbvp::fbvp::{double_forward, solve, Route, SolveRequest};
use fracbvp::par::Exec;
use fracbvp::Params;

fn mc_route(c: &mut Criterion) {
    let p = Params::new(0.6, 1.0, 0.5, 1.0).unwrap();
    let mut group = c.benchmark_group("mc_route");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let req = SolveRequest::new(p, 1.0, 0.5, Route::MonteCarlo)
            .with_draws(100_000)
            .with_exec(exec);
        group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), 100_000), &req, |b, req| {
            b.iter(|| black_box(solve(req).unwrap().value))
        });
    }
    group.finish();
}

fn double_transform(c: &mut Criterion) {
    let probes = [(0.5, 0.5), (1.0, 1.0), (2.0, 2.0)];
    let mut group = c.benchmark_group("double_forward");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| {
                let v = double_forward(|t, x| Ok((-x * x / (4.0 * t)).exp() / t.sqrt()), &probes, 40.0, exec);
                black_box(v.unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, mc_route, double_transform);
criterion_main!(benches);
