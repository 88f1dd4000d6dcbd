use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsn_bench::{fixture, spd_qfim};
use qsn_core::fisher::{prop1_check, qfim_mixed_network, qfim_pure_network};
use qsn_core::states::{local_purification_probe, separable_surrogate};
use qsn_core::Partition;

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("network");
    for (sensors, q) in [(2, 2), (2, 4), (3, 4)] {
        let fx = fixture(1, sensors, q);
        let id = format!("{sensors}x{q}");
        group.bench_with_input(BenchmarkId::new("eigh", &id), &fx, |b, fx| {
            b.iter(|| fx.mixed.eigh())
        });
        group.bench_with_input(BenchmarkId::new("qfim_pure", &id), &fx, |b, fx| {
            b.iter(|| qfim_pure_network(&fx.network, &fx.pure).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("qfim_mixed", &id), &fx, |b, fx| {
            b.iter(|| qfim_mixed_network(&fx.network, &fx.mixed).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("separable_surrogate", &id),
            &fx,
            |b, fx| b.iter(|| separable_surrogate(&fx.pure, &fx.network).unwrap()),
        );
        if sensors * q <= 8 {
            group.bench_with_input(BenchmarkId::new("local_purification", &id), &fx, |b, fx| {
                b.iter(|| local_purification_probe(&fx.mixed, &fx.network).unwrap())
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("prop1_check");
    for d in [4, 8, 16] {
        let f = spd_qfim(2, d)
            .with_partition(Partition::new(vec![d / 2, d - d / 2]).unwrap())
            .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &f, |b, f| {
            b.iter(|| prop1_check(f).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
