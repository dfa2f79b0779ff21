use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use topohdc::corruptions::CorruptionSpec;
use topohdc::hv::{seeded_rng, Channel, Hypervector, PrototypeBank};
use topohdc::pipeline::{train_prototypes, FeatureExtractor};
use topohdc::topology::{extract_primitives, TopologyConfig};
use topohdc::RunConfig;
use topohdc_bench::glyph;

fn hypervectors(c: &mut Criterion) {
    let mut rng = seeded_rng(1, 0);
    let a = Hypervector::random(10_000, &mut rng);
    let b = Hypervector::random(10_000, &mut rng);
    c.bench_function("bind_10k", |bench| bench.iter(|| black_box(&a).bind(black_box(&b)).unwrap()));
    c.bench_function("similarity_10k", |bench| bench.iter(|| black_box(&a).similarity(black_box(&b))));

    let mut bank = PrototypeBank::new(Channel::Hog, 10, 10_000);
    for i in 0..10 {
        bank.accumulate(&Hypervector::from_seed(10_000, 2, i), i as usize).unwrap();
    }
    c.bench_function("predict_10_classes", |bench| bench.iter(|| bank.predict(black_box(&a)).unwrap()));

    let hvs: Vec<Hypervector> = (0..512).map(|i| Hypervector::from_seed(10_000, 3, i)).collect();
    let labels: Vec<usize> = (0..512).map(|i| i % 10).collect();
    c.bench_function("train_prototypes_512", |bench| {
        bench.iter(|| train_prototypes(Channel::Hog, &hvs, &labels, 10, 10_000, 512).unwrap())
    });
}

fn features(c: &mut Criterion) {
    let img = glyph();
    let cfg = TopologyConfig::default();
    c.bench_function("extract_primitives", |bench| bench.iter(|| extract_primitives(black_box(&img), &cfg).unwrap()));
    let fx = FeatureExtractor::new(&RunConfig::default()).unwrap();
    c.bench_function("glyph_features", |bench| bench.iter(|| fx.extract(black_box(&img)).unwrap()));
    let rot: CorruptionSpec = "kind=rotation,param=20,seed=1".parse().unwrap();
    c.bench_function("rotation_corruption", |bench| bench.iter(|| rot.apply(black_box(&img), 3).unwrap()));
}

criterion_group!(benches, hypervectors, features);
criterion_main!(benches);
