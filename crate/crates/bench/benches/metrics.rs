use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use genperm_bench::measure_pair;
use genperm_core::{d_inf, d_square};

fn distances(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance");
    for cells in [5, 10, 20] {
        let (a, b) = measure_pair(cells, 1);
        group.bench_with_input(BenchmarkId::new("d_inf_exact", cells), &cells, |bench, _| bench.iter(|| d_inf(&a, &b)));
        group.bench_with_input(BenchmarkId::new("d_square_exact", cells), &cells, |bench, _| {
            bench.iter(|| d_square(&a, &b))
        });
        let (fa, fb) = (a.to_f64(), b.to_f64());
        group.bench_with_input(BenchmarkId::new("d_inf_f64", cells), &cells, |bench, _| bench.iter(|| d_inf(&fa, &fb)));
        group.bench_with_input(BenchmarkId::new("d_square_f64", cells), &cells, |bench, _| {
            bench.iter(|| d_square(&fa, &fb))
        });
    }
    group.finish();
}

criterion_group!(benches, distances);
criterion_main!(benches);
