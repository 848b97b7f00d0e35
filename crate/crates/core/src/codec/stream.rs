//! Per-neuron random streams.
//!
//! Every (seed, word, dimension) triple owns an independent generator whose
//! state depends only on that triple, so rasters do not change with thread
//! count or with the order in which words are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifier for a word: FNV-1a over its UTF-8 bytes.
pub fn word_stream_id(word: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in word.as_bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn stream_seed(seed: u64, stream_id: u64, dim: u64) -> u64 {
    let h = splitmix64(seed ^ 0x5370_696B_6553_6565);
    let h = splitmix64(h ^ stream_id);
    splitmix64(h ^ dim.wrapping_mul(0xD134_2543_DE82_EF95))
}

pub(crate) fn neuron_rng(seed: u64, stream_id: u64, dim: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, stream_id, dim as u64))
}
