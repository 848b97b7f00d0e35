//! Synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use word2spike::{EmbeddingSet, SimilarityPair};

/// `words` x `dim` embeddings with entries uniform in [-1, 1).
pub fn embeddings(words: usize, dim: usize, seed: u64) -> EmbeddingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = (0..words).map(|i| format!("w{}", i)).collect();
    let data = (0..words * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    EmbeddingSet::from_flat(names, data, dim).expect("synthetic dimensions are consistent")
}

/// Random word pairs from `set` with random scores in [0, 10).
pub fn similarity_pairs(set: &EmbeddingSet, pairs: usize, seed: u64) -> Vec<SimilarityPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|_| SimilarityPair {
            word_a: set.words()[rng.random_range(0..set.len())].clone(),
            word_b: set.words()[rng.random_range(0..set.len())].clone(),
            human_score: rng.random_range(0.0..10.0),
        })
        .collect()
}
