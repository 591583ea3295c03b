//! Data-parallel kernels on a one-thread rayon pool and on the default pool.
//! Build with `--no-default-features` to time the sequential fallback.

use std::hint::black_box;

use arw_core::correlations::{count_c6, CostCaps};
use arw_core::kacrice::{variance_quadrature, VarianceConfig};
use arw_core::lattice::enumerate;
use arw_core::montecarlo::ensemble_stats;
use arw_core::PairSumTable;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

/// `single` has one worker; `default` has one per core.
fn pools() -> Vec<(&'static str, ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("single", one), ("default", all)]
}

fn c6(c: &mut Criterion) {
    let mut g = c.benchmark_group("c6_count");
    g.sample_size(10);
    for m in [101u64, 501] {
        let set = enumerate(m);
        let table = PairSumTable::new(&set);
        for (name, pool) in pools() {
            g.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter(|| pool.install(|| count_c6(black_box(&set), &table, &CostCaps::default()).unwrap()))
            });
        }
    }
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("variance_quadrature");
    g.sample_size(10);
    let set = enumerate(5);
    let cfg = VarianceConfig { grid_n: Some(24), ..Default::default() };
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new(name, "m5_grid24"), |b| {
            b.iter(|| pool.install(|| variance_quadrature(black_box(&set), &cfg).unwrap()))
        });
    }
    g.finish();
}

fn ensemble(c: &mut Criterion) {
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    let set = enumerate(3);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new(name, "m3_res32_x16"), |b| {
            b.iter(|| pool.install(|| ensemble_stats(black_box(&set), 16, 32, 0).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, c6, quadrature, ensemble);
criterion_main!(benches);
