use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use word2spike::codec::{roundtrip_ternary, Mode};
use word2spike::{misclassification_probabilities, quantize_all, suggest_threshold, CodecConfig};
use word2spike_bench::embeddings;

fn quantize(c: &mut Criterion) {
    let set = embeddings(10_000, 300, 1);
    let mut group = c.benchmark_group("quantize");
    group.throughput(Throughput::Elements(set.len() as u64));
    group.bench_function("10000x300", |b| b.iter(|| quantize_all(black_box(&set))));
    group.finish();
}

fn roundtrip(c: &mut Criterion) {
    let ternary = quantize_all(&embeddings(1_000, 300, 2));
    let mut group = c.benchmark_group("roundtrip");
    group.throughput(Throughput::Elements(ternary.len() as u64));
    group.sample_size(20);
    for mode in [Mode::Lossless, Mode::Stochastic] {
        let cfg = CodecConfig::default().with_mode(mode).with_seed(3);
        group.bench_with_input(BenchmarkId::new("1000x300", mode), &cfg, |b, cfg| {
            b.iter(|| roundtrip_ternary(ternary.clone(), cfg).unwrap())
        });
    }
    group.finish();
}

fn analysis(c: &mut Criterion) {
    for (name, cfg) in [
        ("200ms", CodecConfig::paper_200ms()),
        ("400ms", CodecConfig::paper_400ms()),
    ] {
        c.bench_function(&format!("misclassification/{}", name), |b| {
            b.iter(|| misclassification_probabilities(black_box(&cfg)).unwrap())
        });
        c.bench_function(&format!("suggest_threshold/{}", name), |b| {
            b.iter(|| suggest_threshold(black_box(&cfg)).unwrap())
        });
    }
}

criterion_group!(benches, quantize, roundtrip, analysis);
criterion_main!(benches);
