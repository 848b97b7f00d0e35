use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use word2spike::evaluator::{overlap_at_k, simlex_eval, NeighborIndex};
use word2spike::{quantize_all, WordList};
use word2spike_bench::{embeddings, similarity_pairs};

fn neighbors(c: &mut Criterion) {
    let set = embeddings(2_000, 300, 4);
    let mut group = c.benchmark_group("neighbors");
    group.sample_size(10);
    group.bench_function("table k=10, 2000x300", |b| {
        b.iter(|| NeighborIndex::new(black_box(&set)).table(10).len())
    });
    let quantized = quantize_all(&set).to_embedding_set();
    let vocab = WordList::from_tokens(set.words().iter().cloned());
    group.bench_function("overlap@10, 2000x300", |b| {
        b.iter(|| overlap_at_k(&set, &quantized, 10, &vocab).unwrap().mean)
    });
    group.finish();
}

fn simlex(c: &mut Criterion) {
    let set = embeddings(5_000, 300, 5);
    let pairs = similarity_pairs(&set, 999, 6);
    c.bench_function("simlex 999 pairs", |b| {
        b.iter(|| simlex_eval(black_box(&set), &pairs).unwrap())
    });
}

criterion_group!(benches, neighbors, simlex);
criterion_main!(benches);
