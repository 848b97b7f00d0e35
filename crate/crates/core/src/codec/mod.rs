//! Rate coding of ternary vectors as Poisson spike rasters.
//!
//! One neuron per dimension. `+1` fires at `rate_plus_hz`, `-1` at
//! `rate_minus_hz`, `0` stays silent. Decoding counts spikes over the
//! observation window:
//!
//! * no spikes decodes to `0`,
//! * an estimated rate at or above `threshold_hz` decodes to `+1` (no upper cap),
//! * anything else decodes to `-1`.
//!
//! In [`Mode::Stochastic`] each neuron is a homogeneous Poisson process sampled
//! through exponential inter-arrival times. [`Mode::Lossless`] emits exactly
//! the expected number of evenly spaced spikes and always decodes back to the
//! input codes.

mod stream;
pub mod wire;

use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::EmbeddingSet;
use crate::error::{Error, Result};
use crate::quantizer::{quantize_all_with, QuantizeOptions, TernarySet, TernaryVector, Trit};

pub use stream::word_stream_id;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Stochastic,
    Lossless,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stochastic" => Ok(Mode::Stochastic),
            "lossless" => Ok(Mode::Lossless),
            other => Err(Error::Config(format!(
                "unknown mode '{}' (expected stochastic or lossless)",
                other
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Stochastic => "stochastic",
            Mode::Lossless => "lossless",
        })
    }
}

/// Codec parameters. The zero level is always silent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub window_s: f64,
    pub rate_plus_hz: f64,
    pub rate_minus_hz: f64,
    pub threshold_hz: f64,
    pub mode: Mode,
    pub seed: u64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self::paper_200ms()
    }
}

impl CodecConfig {
    pub const RATE_ZERO_HZ: f64 = 0.0;

    /// 200 ms window, 100 Hz / 50 Hz, 72 Hz decision boundary.
    pub fn paper_200ms() -> Self {
        CodecConfig {
            window_s: 0.2,
            rate_plus_hz: 100.0,
            rate_minus_hz: 50.0,
            threshold_hz: 72.0,
            mode: Mode::Stochastic,
            seed: 0,
        }
    }

    /// 400 ms window, 200 Hz / 25 Hz. The 72 Hz boundary is kept; it still
    /// sits near the geometric mean of the two rates.
    pub fn paper_400ms() -> Self {
        CodecConfig {
            window_s: 0.4,
            rate_plus_hz: 200.0,
            rate_minus_hz: 25.0,
            threshold_hz: 72.0,
            mode: Mode::Stochastic,
            seed: 0,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-200ms" => Ok(Self::paper_200ms()),
            "paper-400ms" => Ok(Self::paper_400ms()),
            other => Err(Error::Config(format!(
                "unknown preset '{}' (expected paper-200ms or paper-400ms)",
                other
            ))),
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{} must be positive and finite, got {}",
                    name, v
                )))
            }
        };
        positive("window_s", self.window_s)?;
        positive("rate_plus_hz", self.rate_plus_hz)?;
        positive("rate_minus_hz", self.rate_minus_hz)?;
        positive("threshold_hz", self.threshold_hz)?;
        if !(self.rate_minus_hz < self.threshold_hz && self.threshold_hz < self.rate_plus_hz) {
            return Err(Error::Config(format!(
                "threshold {} Hz must lie strictly between rate_minus {} Hz and rate_plus {} Hz",
                self.threshold_hz, self.rate_minus_hz, self.rate_plus_hz
            )));
        }
        if self.mode == Mode::Lossless {
            let k = self.count_threshold();
            let minus = self.lossless_count(self.rate_minus_hz);
            let plus = self.lossless_count(self.rate_plus_hz);
            if minus == 0 || minus >= k || plus < k {
                return Err(Error::Config(format!(
                    "lossless mode emits {} spikes for -1 and {} for +1 but the decode boundary is {} spikes; \
                     widen the window or the rate gap",
                    minus, plus, k
                )));
            }
        }
        Ok(())
    }

    /// Smallest spike count whose estimated rate reaches `threshold_hz`.
    pub fn count_threshold(&self) -> u64 {
        let reaches = |c: u64| c as f64 / self.window_s >= self.threshold_hz;
        let mut k = (self.threshold_hz * self.window_s).ceil().max(0.0) as u64;
        while k > 0 && reaches(k - 1) {
            k -= 1;
        }
        while !reaches(k) {
            k += 1;
        }
        k
    }

    /// Expected spike count `rate * window` rounded to the nearest integer.
    pub fn lossless_count(&self, rate_hz: f64) -> u64 {
        (rate_hz * self.window_s).round() as u64
    }

    pub fn rate_for(&self, t: Trit) -> f64 {
        match t {
            Trit::Plus => self.rate_plus_hz,
            Trit::Zero => Self::RATE_ZERO_HZ,
            Trit::Minus => self.rate_minus_hz,
        }
    }

    /// Classify a spike count.
    pub fn classify(&self, count: u64) -> Trit {
        if count == 0 {
            Trit::Zero
        } else if count >= self.count_threshold() {
            Trit::Plus
        } else {
            Trit::Minus
        }
    }
}

/// Target or estimated firing rate per dimension, in Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateVector(pub Vec<f64>);

impl RateVector {
    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Spike times per dimension, in seconds within `[0, window_s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeRaster {
    window_s: f64,
    trains: Vec<Vec<f64>>,
}

impl SpikeRaster {
    /// Validates that every train is strictly increasing inside the window.
    pub fn new(window_s: f64, trains: Vec<Vec<f64>>) -> Result<Self> {
        Self::checked(window_s, trains, true)
    }

    /// Like [`SpikeRaster::new`] but accepts coincident spikes, which appear
    /// once times have been truncated to a finite decimal resolution.
    pub fn with_coincident(window_s: f64, trains: Vec<Vec<f64>>) -> Result<Self> {
        Self::checked(window_s, trains, false)
    }

    fn checked(window_s: f64, trains: Vec<Vec<f64>>, strict: bool) -> Result<Self> {
        if !(window_s.is_finite() && window_s > 0.0) {
            return Err(Error::Invalid(format!(
                "raster window must be positive, got {}",
                window_s
            )));
        }
        for (d, train) in trains.iter().enumerate() {
            let mut prev = f64::NEG_INFINITY;
            for &t in train {
                if !(t.is_finite() && (0.0..window_s).contains(&t)) {
                    return Err(Error::Invalid(format!(
                        "dimension {}: spike time {} outside [0, {})",
                        d, t, window_s
                    )));
                }
                if t < prev || (strict && t == prev) {
                    return Err(Error::Invalid(format!("dimension {}: spike times not increasing", d)));
                }
                prev = t;
            }
        }
        Ok(SpikeRaster { window_s, trains })
    }

    pub fn window_s(&self) -> f64 {
        self.window_s
    }

    pub fn trains(&self) -> &[Vec<f64>] {
        &self.trains
    }

    pub fn dims(&self) -> usize {
        self.trains.len()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.trains.iter().map(|t| t.len() as u64).collect()
    }

    pub fn total_spikes(&self) -> usize {
        self.trains.iter().map(Vec::len).sum()
    }
}

pub fn rates_from_ternary(t: &TernaryVector, cfg: &CodecConfig) -> RateVector {
    RateVector(t.values().iter().map(|&v| cfg.rate_for(v)).collect())
}

/// Generate one spike train per dimension. `stream_id` selects the random
/// streams; see [`word_stream_id`].
pub fn generate_raster(rates: &RateVector, cfg: &CodecConfig, stream_id: u64) -> SpikeRaster {
    let window = cfg.window_s;
    let trains = rates
        .rates()
        .iter()
        .enumerate()
        .map(|(dim, &rate)| {
            if rate <= 0.0 {
                return Vec::new();
            }
            match cfg.mode {
                Mode::Lossless => {
                    let n = cfg.lossless_count(rate);
                    let step = window / n as f64;
                    (0..n).map(|j| (j as f64 + 0.5) * step).collect()
                }
                Mode::Stochastic => poisson_train(rate, window, cfg.seed, stream_id, dim),
            }
        })
        .collect();
    SpikeRaster {
        window_s: window,
        trains,
    }
}

fn poisson_train(rate: f64, window: f64, seed: u64, stream_id: u64, dim: usize) -> Vec<f64> {
    let mut rng = stream::neuron_rng(seed, stream_id, dim);
    let mut train = Vec::with_capacity((rate * window * 1.5) as usize + 4);
    let mut t = 0.0;
    loop {
        let u: f64 = rng.sample(Open01);
        t += -u.ln() / rate;
        if t >= window {
            break;
        }
        debug_assert!(train.last().is_none() || train.last().is_some_and(|&p| p < t));
        train.push(t);
    }
    train
}

pub fn estimate_rates(raster: &SpikeRaster) -> RateVector {
    RateVector(raster.trains.iter().map(|t| t.len() as f64 / raster.window_s).collect())
}

fn check_window(raster_s: f64, cfg: &CodecConfig) -> Result<()> {
    if (raster_s - cfg.window_s).abs() > 1e-9 * cfg.window_s.max(raster_s) {
        return Err(Error::WindowMismatch {
            raster_s,
            config_s: cfg.window_s,
        });
    }
    Ok(())
}

/// Decode a raster back to ternary codes. The result carries no scale.
pub fn decode(raster: &SpikeRaster, cfg: &CodecConfig) -> Result<TernaryVector> {
    check_window(raster.window_s, cfg)?;
    Ok(decode_counts(&raster.counts(), cfg))
}

/// Decode from per-dimension spike counts alone.
pub fn decode_counts(counts: &[u64], cfg: &CodecConfig) -> TernaryVector {
    TernaryVector::from_codes(counts.iter().map(|&c| cfg.classify(c)).collect())
}

/// Encode one ternary vector for the word with the given stream id.
pub fn encode(t: &TernaryVector, cfg: &CodecConfig, stream_id: u64) -> SpikeRaster {
    generate_raster(&rates_from_ternary(t, cfg), cfg, stream_id)
}

/// Encode every word of `set`, in vocabulary order.
pub fn encode_set(set: &TernarySet, cfg: &CodecConfig) -> Result<Vec<SpikeRaster>> {
    cfg.validate()?;
    Ok(set
        .words()
        .par_iter()
        .zip(set.vectors().par_iter())
        .map(|(w, v)| encode(v, cfg, word_stream_id(w)))
        .collect())
}

/// Decode `(word, raster)` pairs into a ternary set.
pub fn decode_set(words: Vec<String>, rasters: &[SpikeRaster], cfg: &CodecConfig) -> Result<TernarySet> {
    cfg.validate()?;
    let vectors = rasters.par_iter().map(|r| decode(r, cfg)).collect::<Result<Vec<_>>>()?;
    TernarySet::new(words, vectors)
}

/// Result of pushing a vocabulary through quantize, encode and decode.
#[derive(Clone, Debug)]
pub struct Roundtrip {
    pub ternary: TernarySet,
    pub decoded: TernarySet,
    /// Per word: decoded codes equal the quantized codes in every dimension.
    pub matches: Vec<bool>,
}

impl Roundtrip {
    pub fn exact_fraction(&self) -> f64 {
        self.matches.iter().filter(|&&m| m).count() as f64 / self.matches.len() as f64
    }
}

pub fn roundtrip(set: &EmbeddingSet, cfg: &CodecConfig) -> Result<Roundtrip> {
    roundtrip_with(set, cfg, &QuantizeOptions::default())
}

pub fn roundtrip_with(set: &EmbeddingSet, cfg: &CodecConfig, qopts: &QuantizeOptions) -> Result<Roundtrip> {
    cfg.validate()?;
    let ternary = quantize_all_with(set, qopts);
    roundtrip_ternary(ternary, cfg)
}

/// Encode and decode an already quantized set. Rasters are dropped as soon
/// as they are decoded.
pub fn roundtrip_ternary(ternary: TernarySet, cfg: &CodecConfig) -> Result<Roundtrip> {
    cfg.validate()?;
    let decoded_vectors: Vec<TernaryVector> = ternary
        .words()
        .par_iter()
        .zip(ternary.vectors().par_iter())
        .map(|(w, v)| {
            let raster = encode(v, cfg, word_stream_id(w));
            decode(&raster, cfg)
        })
        .collect::<Result<_>>()?;
    let matches = ternary
        .vectors()
        .iter()
        .zip(&decoded_vectors)
        .map(|(a, b)| a.values() == b.values())
        .collect();
    let decoded = TernarySet::new(ternary.words().to_vec(), decoded_vectors)?;
    Ok(Roundtrip {
        ternary,
        decoded,
        matches,
    })
}
