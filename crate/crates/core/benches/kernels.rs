//! Sequential vs rayon timings for the enumeration kernels.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use meandim::carpet::CarpetSpec;
use meandim::grid2d::{self, Grid2DSpec};
use meandim::oracle::qbox;
use meandim::oracle::{covering_bounds, MetricDescriptor, PointCloud};
use meandim::selfsim;
use meandim::symbolic::TupleSet;
use meandim::weighted::{self, FiberMethod, PairShiftSystem};
use meandim::{Budgets, Execution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn modes() -> Vec<(&'static str, Execution)> {
    #[allow(unused_mut)]
    let mut v = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Execution::Parallel));
    v
}

fn min_gap(c: &mut Criterion) {
    let mut g = c.benchmark_group("min_gap");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::new(name, "a=3 beta=3.5 n=12"), |b| {
            b.iter(|| selfsim::min_gap(3, 3.5, 12, &Budgets::default(), exec).unwrap())
        });
        g.bench_function(BenchmarkId::new(name, "a=2 beta=e n=18"), |b| {
            b.iter(|| selfsim::min_gap(2, std::f64::consts::E, 18, &Budgets::default(), exec).unwrap())
        });
    }
    g.finish();
}

fn rectangles(c: &mut Criterion) {
    let mut g = c.benchmark_group("count_rectangles");
    g.sample_size(10);
    let spec = Grid2DSpec::hard_square();
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::new(name, "hard square 10x10"), |b| {
            b.iter(|| grid2d::count_rectangles(&spec, 10, 10, &Budgets::default(), exec).unwrap())
        });
    }
    g.finish();
}

fn qboxes(c: &mut Criterion) {
    let mut g = c.benchmark_group("qbox_family");
    g.sample_size(10);
    let spec = CarpetSpec::example();
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::new(name, "N=2 M=5"), |b| {
            b.iter(|| qbox::qbox_family(&spec, 2, 5, &Budgets::default(), exec).unwrap())
        });
    }
    g.finish();
}

fn fibers(c: &mut Criterion) {
    let mut g = c.benchmark_group("fiber_counts");
    g.sample_size(10);
    let pairs: Vec<(u8, u8)> = (0..5u8).flat_map(|u| (0..3u8).filter(move |v| (u + v) % 2 == 0).map(move |v| (u, v))).collect();
    let sys = PairShiftSystem::from_tuples(TupleSet::new(5, 3, pairs).unwrap()).unwrap();
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::new(name, "a=5 b=3 N=9"), |b| {
            b.iter(|| weighted::fiber_counts_with(&sys, 9, &Budgets::default(), exec, FiberMethod::Enumerate).unwrap())
        });
    }
    g.finish();
}

fn covering(c: &mut Criterion) {
    let mut g = c.benchmark_group("covering_bounds");
    g.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let pts: Vec<Vec<f64>> = (0..4000).map(|_| (0..6).map(|_| rng.gen::<f64>()).collect()).collect();
    let cloud = PointCloud::from_points(&pts, MetricDescriptor::linf(), 0.0).unwrap();
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::new(name, "4000 points eps=0.3"), |b| {
            b.iter(|| covering_bounds(black_box(&cloud), 0.3, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, min_gap, rectangles, qboxes, fibers, covering);
criterion_main!(benches);
