use chanaccess_bench::weighted_instance;
use chanaccess_core::graph::VertexId;
use chanaccess_core::mwis::{exact_mwis, robust_ptas};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_mwis");
    for &(n, m) in &[(8, 2), (12, 3), (15, 3)] {
        let (h, w) = weighted_instance(n, m, 4.0, 42);
        let all: Vec<VertexId> = h.vertices().collect();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n}x{m}")),
            &(h, all, w),
            |b, (h, all, w)| b.iter(|| exact_mwis(h, all, w).unwrap()),
        );
    }
    group.finish();
}

fn bench_ptas(c: &mut Criterion) {
    let mut group = c.benchmark_group("robust_ptas");
    for &(n, m) in &[(15, 3), (50, 5)] {
        let (h, w) = weighted_instance(n, m, 5.0, 7);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n}x{m}")),
            &(h, w),
            |b, (h, w)| b.iter(|| robust_ptas(h, w, 0.5).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_exact, bench_ptas);
criterion_main!(benches);
