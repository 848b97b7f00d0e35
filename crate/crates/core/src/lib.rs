//! Word2Spike: rate-coded spike representations of word embeddings.
//!
//! The pipeline is
//!
//! 1. load a continuous embedding file ([`corpus_io`]),
//! 2. ternarize every vector with an absmean threshold ([`quantizer`]),
//! 3. map `+1 / 0 / -1` to firing rates and sample Poisson spike rasters ([`codec`]),
//! 4. count spikes and threshold the estimated rates to recover the codes ([`codec`]),
//!
//! with [`analysis`] giving the exact decode error rates of the stochastic
//! channel and [`evaluator`] scoring how much semantic structure survives.
//!
//! ```
//! use word2spike::{quantize, encode, decode, CodecConfig, Mode};
//!
//! let codes = quantize(&[0.9, -0.05, -1.2, 0.1]).unwrap();
//! let cfg = CodecConfig::paper_200ms().with_mode(Mode::Lossless);
//! let raster = encode(&codes, &cfg, 42);
//! assert_eq!(decode(&raster, &cfg).unwrap().values(), codes.values());
//! ```

pub mod analysis;
pub mod codec;
pub mod corpus_io;
mod error;
pub mod evaluator;
pub mod quantizer;

pub use analysis::{misclassification_probabilities, rate_spread, suggest_threshold, ErrorAnalysis};
pub use codec::{
    decode, decode_counts, encode, estimate_rates, generate_raster, rates_from_ternary, roundtrip, word_stream_id,
    CodecConfig, Mode, RateVector, Roundtrip, SpikeRaster,
};
pub use corpus_io::{AnalogyQuad, EmbeddingSet, SimilarityPair, WordList};
pub use error::{Error, Result};
pub use evaluator::{full_report, EvalReport, FullReport};
pub use quantizer::{absmean_gamma, quantize, quantize_all, Composition, TernarySet, TernaryVector, Trit};
