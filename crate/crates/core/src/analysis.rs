//! Exact error analysis of the threshold decoder.
//!
//! Over a window `T` a neuron firing at `r` Hz emits `N ~ Poisson(rT)` spikes,
//! so the estimated rate `N / T` has mean `r` and standard deviation
//! `sqrt(r / T)`. With the count boundary `k* = ceil(threshold * T)`:
//!
//! * a `-1` neuron decodes `+1` with probability `P(N- >= k*)` and `0` with `P(N- = 0)`,
//! * a `+1` neuron decodes `-1` with probability `P(1 <= N+ < k*)` and `0` with `P(N+ = 0)`,
//! * a `0` neuron is silent and never misdecodes.
//!
//! All probabilities come from direct summation of Poisson masses.

use serde::Serialize;

use crate::codec::CodecConfig;
use crate::error::{Error, Result};
use crate::quantizer::{Composition, Trit};

/// Poisson probabilities by direct summation of the mass function.
pub mod poisson {
    fn ln_pmf_at(k: u64, lambda: f64) -> f64 {
        let ln_fact: f64 = (2..=k).map(|j| (j as f64).ln()).sum();
        -lambda + k as f64 * lambda.ln() - ln_fact
    }

    /// `P(N = k)`.
    pub fn pmf(k: u64, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        ln_pmf_at(k, lambda).exp()
    }

    /// `P(N <= k)`, summed upward from zero.
    pub fn cdf(k: u64, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return 1.0;
        }
        let ln_lambda = lambda.ln();
        let mut ln_p = -lambda;
        let mut sum = ln_p.exp();
        for j in 1..=k {
            ln_p += ln_lambda - (j as f64).ln();
            sum += ln_p.exp();
        }
        sum.min(1.0)
    }

    /// `P(N >= k)`, summed upward from `k` until the terms vanish.
    pub fn sf(k: u64, lambda: f64) -> f64 {
        if k == 0 {
            return 1.0;
        }
        if lambda == 0.0 {
            return 0.0;
        }
        let ln_lambda = lambda.ln();
        let mut ln_p = ln_pmf_at(k, lambda);
        let mut sum = 0.0;
        let mut j = k;
        loop {
            let term = ln_p.exp();
            sum += term;
            if j as f64 > lambda && (term == 0.0 || term < sum * 1e-18) {
                break;
            }
            j += 1;
            ln_p += ln_lambda - (j as f64).ln();
        }
        sum.min(1.0)
    }

    /// `P(lo <= N <= hi)`; zero when `lo > hi`.
    pub fn range(lo: u64, hi: u64, lambda: f64) -> f64 {
        if lo > hi {
            return 0.0;
        }
        (lo..=hi).map(|j| pmf(j, lambda)).sum::<f64>().min(1.0)
    }
}

/// Per-dimension decode error probabilities for one configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorAnalysis {
    /// Expected spike count of a `-1` neuron.
    pub lambda_minus: f64,
    /// Expected spike count of a `+1` neuron.
    pub lambda_plus: f64,
    pub count_threshold: u64,
    pub p_minus_as_plus: f64,
    pub p_minus_as_zero: f64,
    pub p_plus_as_minus: f64,
    pub p_plus_as_zero: f64,
}

impl ErrorAnalysis {
    /// Probability that a `-1` dimension decodes to anything else.
    pub fn minus_error(&self) -> f64 {
        self.p_minus_as_plus + self.p_minus_as_zero
    }

    pub fn plus_error(&self) -> f64 {
        self.p_plus_as_minus + self.p_plus_as_zero
    }

    /// Sum of the per-level error probabilities of the two nonzero levels.
    pub fn total_error(&self) -> f64 {
        self.minus_error() + self.plus_error()
    }

    /// Rows are the encoded symbol, columns the decoded one, both ordered
    /// `-1, 0, +1`.
    pub fn confusion(&self) -> [[f64; 3]; 3] {
        [
            [1.0 - self.minus_error(), self.p_minus_as_zero, self.p_minus_as_plus],
            [0.0, 1.0, 0.0],
            [self.p_plus_as_minus, self.p_plus_as_zero, 1.0 - self.plus_error()],
        ]
    }

    /// Probability that a word with the given symbol counts fails exact
    /// reconstruction. Zero dimensions never fail.
    pub fn expected_word_error(&self, composition: &Composition) -> f64 {
        let ln_ok = composition.plus as f64 * (-self.plus_error()).ln_1p()
            + composition.minus as f64 * (-self.minus_error()).ln_1p();
        -ln_ok.exp_m1()
    }
}

pub fn misclassification_probabilities(cfg: &CodecConfig) -> Result<ErrorAnalysis> {
    cfg.validate()?;
    let lambda_minus = cfg.rate_minus_hz * cfg.window_s;
    let lambda_plus = cfg.rate_plus_hz * cfg.window_s;
    let k = cfg.count_threshold();
    if cfg.mode == crate::codec::Mode::Lossless {
        log::debug!("analysing stochastic error rates for a lossless configuration");
    }
    Ok(ErrorAnalysis {
        lambda_minus,
        lambda_plus,
        count_threshold: k,
        p_minus_as_plus: poisson::sf(k, lambda_minus),
        p_minus_as_zero: poisson::pmf(0, lambda_minus),
        p_plus_as_minus: poisson::range(1, k.saturating_sub(1), lambda_plus),
        p_plus_as_zero: poisson::pmf(0, lambda_plus),
    })
}

/// Mean and one-sigma spread of the estimated rate for a level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelSpread {
    pub level: Trit,
    pub rate_hz: f64,
    pub mean_count: f64,
    pub sd_count: f64,
    pub mean_hz: f64,
    pub sd_hz: f64,
}

/// Spreads for the `+1` and `-1` levels, in that order.
pub fn rate_spread(cfg: &CodecConfig) -> Vec<LevelSpread> {
    [Trit::Plus, Trit::Minus]
        .into_iter()
        .map(|level| {
            let rate = cfg.rate_for(level);
            let mean_count = rate * cfg.window_s;
            LevelSpread {
                level,
                rate_hz: rate,
                mean_count,
                sd_count: mean_count.sqrt(),
                mean_hz: rate,
                sd_hz: (rate / cfg.window_s).sqrt(),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdSuggestion {
    pub threshold_hz: f64,
    pub count_threshold: u64,
    /// `P(-1 decodes +1) + P(+1 decodes -1)` at this boundary.
    pub error_sum: f64,
}

/// Search every integer count boundary `k` with `lambda_minus < k <= lambda_plus`
/// and return the one minimising the sign-flip error sum. Ties go to the
/// larger `k`.
pub fn suggest_threshold(cfg: &CodecConfig) -> Result<ThresholdSuggestion> {
    if !(cfg.window_s.is_finite() && cfg.window_s > 0.0) {
        return Err(Error::Config(format!(
            "window_s must be positive, got {}",
            cfg.window_s
        )));
    }
    if !(cfg.rate_minus_hz > 0.0 && cfg.rate_minus_hz < cfg.rate_plus_hz && cfg.rate_plus_hz.is_finite()) {
        return Err(Error::Degenerate(format!(
            "need 0 < rate_minus < rate_plus, got {} Hz and {} Hz",
            cfg.rate_minus_hz, cfg.rate_plus_hz
        )));
    }
    let lambda_minus = cfg.rate_minus_hz * cfg.window_s;
    let lambda_plus = cfg.rate_plus_hz * cfg.window_s;
    let lo = lambda_minus.floor() as u64 + 1;
    let hi = lambda_plus.floor() as u64;
    if lo > hi {
        return Err(Error::Degenerate(format!(
            "no integer spike count separates {} and {} expected spikes",
            lambda_minus, lambda_plus
        )));
    }
    let mut best: Option<(u64, f64)> = None;
    for k in lo..=hi {
        let err = poisson::sf(k, lambda_minus) + poisson::range(1, k - 1, lambda_plus);
        if best.is_none() || best.is_some_and(|(_, e)| err <= e) {
            best = Some((k, err));
        }
    }
    let (k, error_sum) = best.expect("search range is nonempty");
    Ok(ThresholdSuggestion {
        threshold_hz: k as f64 / cfg.window_s,
        count_threshold: k,
        error_sum,
    })
}
