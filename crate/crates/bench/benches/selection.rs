use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mctd_bench::ar_chain;
use mctd_core::loss::TruthIntegrals;
use mctd_core::select::{oracle_select_with, select, Selector, DEFAULT_L};
use mctd_core::sim::Example;
use mctd_core::{QuadSpec, StatsPyramid};

fn binning(c: &mut Criterion) {
    let mut group = c.benchmark_group("bin");
    for n in [1_000, 4_000] {
        let sample = ar_chain(n, 1);
        group.bench_with_input(BenchmarkId::new("level7", n), &sample, |b, s| {
            b.iter(|| StatsPyramid::bin(s, 7).unwrap())
        });
    }
    group.finish();
}

fn selection(c: &mut Criterion) {
    let sample = ar_chain(1_000, 2);
    let mut group = c.benchmark_group("select");
    group.sample_size(20);
    for level in [3, 5, 7] {
        group.bench_with_input(BenchmarkId::new("end_to_end", level), &level, |b, &l| {
            b.iter(|| select(&sample, DEFAULT_L, l).unwrap())
        });
        let stats = StatsPyramid::bin(&sample, level).unwrap();
        group.bench_with_input(BenchmarkId::new("dp_only", level), &level, |b, &l| {
            b.iter(|| Selector::new(&stats, DEFAULT_L, l).unwrap().run().unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let sample = ar_chain(1_000, 3);
    let level = 7;
    let stats = StatsPyramid::bin(&sample, level).unwrap();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("integrals_level7", |b| {
        b.iter(|| {
            TruthIntegrals::build(&Example::Ar, &sample, level, &QuadSpec::default()).unwrap()
        })
    });
    let integrals =
        TruthIntegrals::build(&Example::Ar, &sample, level, &QuadSpec::default()).unwrap();
    group.bench_function("select_level7", |b| {
        b.iter(|| oracle_select_with(&stats, &integrals, level).unwrap())
    });
    group.finish();
}

criterion_group!(benches, binning, selection, oracle);
criterion_main!(benches);
