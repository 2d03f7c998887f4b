use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sillage::analysis::{analyze, pca, standardize, ward_cluster, ComponentSelection};
use sillage::annotation::{autolabel, AutolabelOptions};
use sillage::features::{extract_all, FlagOptions};
use sillage::synth::{default_archetypes, generate};
use sillage_bench::{bench_features, bench_scheme};

fn bench_ward(c: &mut Criterion) {
    let mut group = c.benchmark_group("ward_cluster");
    for n in [50, 150, 300] {
        let fm = bench_features(n);
        let z = standardize(&fm).unwrap().z;
        group.bench_with_input(BenchmarkId::from_parameter(n), &z, |b, z| {
            b.iter(|| ward_cluster(black_box(z)).unwrap())
        });
    }
    group.finish();
}

fn bench_pca(c: &mut Criterion) {
    let fm = bench_features(2000);
    let standardized = standardize(&fm).unwrap();
    c.bench_function("pca_2000x8", |b| {
        b.iter(|| pca(black_box(&standardized)).unwrap())
    });
}

fn bench_analyze(c: &mut Criterion) {
    let fm = bench_features(70);
    c.bench_function("analyze_70x8_k5", |b| {
        b.iter(|| analyze(black_box(&fm), 5, ComponentSelection::All, 0.95).unwrap())
    });
}

fn bench_extract(c: &mut Criterion) {
    let scheme = bench_scheme();
    let specs: Vec<_> = default_archetypes(&scheme)
        .into_iter()
        .map(|s| (s, 14))
        .collect();
    let corpus = generate(&specs, &scheme, 42).unwrap();
    c.bench_function("extract_all_70_sessions", |b| {
        b.iter(|| {
            extract_all(
                black_box(&corpus.sessions),
                black_box(&corpus.annotations),
                &scheme,
                FlagOptions::default(),
            )
            .unwrap()
        })
    });
}

fn bench_autolabel(c: &mut Criterion) {
    let scheme = bench_scheme();
    let options = AutolabelOptions::default();
    let query = "avantages incovenients programme plagiat AND morphologie word embeddings";
    c.bench_function("autolabel_query", |b| {
        b.iter(|| autolabel(black_box(query), &scheme, &options).unwrap())
    });
}

criterion_group!(
    benches,
    bench_ward,
    bench_pca,
    bench_analyze,
    bench_extract,
    bench_autolabel
);
criterion_main!(benches);
