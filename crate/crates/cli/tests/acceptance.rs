//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p word2spike-cli --test acceptance` (add `--release`
//! for timings representative of a laptop build).

use std::collections::BTreeMap;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use word2spike::analysis::{poisson, rate_spread};
use word2spike::codec::{encode, generate_raster, roundtrip, RateVector};
use word2spike::corpus_io::write_embeddings;
use word2spike::evaluator::{
    analogy_eval, full_report, overlap_at_k, reconstruction_accuracy, spearman, Datasets, ReportOptions,
};
use word2spike::quantizer::{absmean_gamma, quantize};
use word2spike::{
    decode, misclassification_probabilities, AnalogyQuad, CodecConfig, EmbeddingSet, Mode, SimilarityPair,
    TernaryVector, Trit, WordList,
};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_set(rng: &mut ChaCha8Rng, words: usize, dim: usize) -> EmbeddingSet {
    let names = (0..words).map(|i| format!("w{:05}", i)).collect();
    let data = (0..words * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    EmbeddingSet::from_flat(names, data, dim).expect("synthetic set")
}

fn ac1_lossless_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let set = random_set(&mut rng, 10_000, 300);
    let cfg = CodecConfig::default().with_mode(Mode::Lossless);
    let start = Instant::now();
    let rt = roundtrip(&set, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let rec = reconstruction_accuracy(&rt.ternary, &rt.decoded).map_err(|e| e.to_string())?;
    ensure(rec.word_exact == 1.0 && rt.exact_fraction() == 1.0, || {
        format!("word accuracy {}", rec.word_exact)
    })?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {:?}", elapsed))?;
    Ok(format!("10000 x 300, 100.00% exact in {:.2?}", elapsed))
}

fn ac2_stochastic_calibration() -> Outcome {
    const N: usize = 100_000;
    let cfg = CodecConfig::default().with_seed(20_240_601);
    let exact = misclassification_probabilities(&cfg).map_err(|e| e.to_string())?;
    // Independent check of the headline constant.
    let tail: f64 = 1.0 - (0..15u64).map(|k| poisson::pmf(k, 10.0)).sum::<f64>();
    ensure((exact.p_minus_as_plus - 0.083_458_472_934_662_82).abs() < 1e-12, || {
        format!("P(-1 -> +1) = {}", exact.p_minus_as_plus)
    })?;
    ensure((tail - exact.p_minus_as_plus).abs() < 1e-12, || {
        format!("summation gives {}", tail)
    })?;

    let start = Instant::now();
    let expected = exact.confusion();
    let mut details = Vec::new();
    for (row, level, stream) in [(0usize, Trit::Minus, 11u64), (2, Trit::Plus, 12)] {
        let t = TernaryVector::from_codes(vec![level; N]);
        let decoded = decode(&encode(&t, &cfg, stream), &cfg).map_err(|e| e.to_string())?;
        let mut hist = [0usize; 3];
        for d in decoded.values() {
            hist[d.index()] += 1;
        }
        for col in 0..3 {
            let p = expected[row][col];
            let observed = hist[col] as f64 / N as f64;
            let se = (p * (1.0 - p) / N as f64).sqrt();
            ensure((observed - p).abs() <= 3.0 * se, || {
                format!(
                    "{} -> col {}: observed {} vs exact {} (se {})",
                    level, col, observed, p, se
                )
            })?;
        }
        details.push(format!(
            "{:+}->{:+}: {:.4} (exact {:.4})",
            level.value(),
            -level.value(),
            hist[2 - row] as f64 / N as f64,
            expected[row][2 - row]
        ));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {:?}", elapsed))?;
    Ok(format!("{} in {:.2?}", details.join(", "), elapsed))
}

fn ac3_rate_numerics() -> Outcome {
    let cfg = CodecConfig::default();
    let spreads = rate_spread(&cfg);
    let plus = spreads.iter().find(|s| s.level == Trit::Plus).ok_or("missing +1")?;
    let minus = spreads.iter().find(|s| s.level == Trit::Minus).ok_or("missing -1")?;
    ensure(
        (plus.sd_hz - 22.4).abs() <= 0.1 && (minus.sd_hz - 15.8).abs() <= 0.1,
        || format!("spreads {} / {}", plus.sd_hz, minus.sd_hz),
    )?;
    let lossless = cfg.with_mode(Mode::Lossless);
    let t = TernaryVector::from_codes(vec![Trit::Plus, Trit::Minus, Trit::Zero]);
    let counts = encode(&t, &lossless, 0).counts();
    ensure(counts == [20, 10, 0], || format!("lossless counts {:?}", counts))?;
    ensure(plus.mean_count == 20.0 && minus.mean_count == 10.0, || {
        "expected counts".into()
    })?;
    Ok(format!(
        "+-{:.2} Hz / +-{:.2} Hz, lossless counts {:?}",
        plus.sd_hz, minus.sd_hz, counts
    ))
}

fn chi_square(counts: &[u64], lambda: f64) -> (f64, usize) {
    let n = counts.len() as f64;
    let mut observed: BTreeMap<u64, f64> = BTreeMap::new();
    for &c in counts {
        *observed.entry(c).or_default() += 1.0;
    }
    // Pool from the left until each bin expects at least 5; the last bin takes the upper tail.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut exp_acc, mut obs_acc) = (0.0, 0.0);
    let mut k = 0u64;
    loop {
        let tail = poisson::sf(k, lambda) * n;
        if tail < 10.0 {
            let tail_obs: f64 = observed.range(k..).map(|(_, v)| v).sum();
            let last = (exp_acc + tail, obs_acc + tail_obs);
            bins.push(last);
            break;
        }
        exp_acc += poisson::pmf(k, lambda) * n;
        obs_acc += observed.get(&k).copied().unwrap_or(0.0);
        if exp_acc >= 5.0 {
            bins.push((exp_acc, obs_acc));
            exp_acc = 0.0;
            obs_acc = 0.0;
        }
        k += 1;
    }
    let stat = bins.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    (stat, bins.len() - 1)
}

fn ac4_poisson_exactness() -> Outcome {
    const TRIALS: usize = 100_000;
    let cfg = CodecConfig::default().with_seed(7);
    let mut details = Vec::new();
    for (rate, stream) in [(cfg.rate_plus_hz, 1u64), (cfg.rate_minus_hz, 2)] {
        let lambda = rate * cfg.window_s;
        let counts = generate_raster(&RateVector(vec![rate; TRIALS]), &cfg, stream).counts();
        let (stat, df) = chi_square(&counts, lambda);
        let critical = ChiSquared::new(df as f64)
            .map_err(|e| e.to_string())?
            .inverse_cdf(0.999);
        ensure(stat < critical, || {
            format!("lambda {}: chi2 {:.2} >= {:.2} (df {})", lambda, stat, critical, df)
        })?;
        let mean = counts.iter().sum::<u64>() as f64 / TRIALS as f64;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (TRIALS - 1) as f64;
        ensure((var / lambda - 1.0).abs() <= 0.05, || {
            format!("lambda {}: variance {}", lambda, var)
        })?;
        details.push(format!(
            "lambda {}: chi2 {:.1} < {:.1} (df {}), var {:.3}",
            lambda, stat, critical, df, var
        ));
    }
    Ok(details.join("; "))
}

fn ac5_quantizer_properties() -> Outcome {
    const VECTORS: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut symmetry, mut scale, mut boundary, mut near_ties) = (0usize, 0usize, 0usize, 0usize);
    for _ in 0..VECTORS {
        let dim = rng.random_range(1..=24);
        {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            let q = quantize(&v).map_err(|e| e.to_string())?;
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            if quantize(&neg).map(|n| n != -&q).unwrap_or(true) {
                symmetry += 1;
            }
            let c = rng.random_range(1e-3..1e3);
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let qs = quantize(&scaled).map_err(|e| e.to_string())?;
            let gamma = q.gamma().unwrap_or(0.0);
            for (j, (a, b)) in q.values().iter().zip(qs.values()).enumerate() {
                if a != b {
                    // A flip is only excusable when the element sits on the boundary to rounding.
                    if ((v[j].abs() - gamma) / gamma).abs() < 1e-12 {
                        near_ties += 1;
                    } else {
                        scale += 1;
                    }
                }
            }
        }
        {
            // Integer construction so that mean |v| is an exact integer present in v.
            let g: i64 = rng.random_range(1..=1000);
            let pairs = (dim / 2).max(1);
            let mut v = Vec::with_capacity(2 * pairs + 1);
            for _ in 0..pairs {
                let d = rng.random_range(0..=g);
                v.push((g + d) as f64);
                v.push((g - d) as f64);
            }
            v.push(g as f64);
            for x in v.iter_mut() {
                if rng.random_bool(0.5) {
                    *x = -*x;
                }
            }
            let gamma = absmean_gamma(&v).map_err(|e| e.to_string())?;
            ensure(gamma == g as f64, || format!("gamma {} != {}", gamma, g))?;
            let q = quantize(&v).map_err(|e| e.to_string())?;
            for (x, t) in v.iter().zip(q.values()) {
                if x.abs() == gamma && *t != Trit::Zero {
                    boundary += 1;
                }
            }
        }
    }
    ensure(symmetry == 0 && scale == 0 && boundary == 0, || {
        format!(
            "violations: symmetry {}, scale {}, boundary {}",
            symmetry, scale, boundary
        )
    })?;
    Ok(format!(
        "{} vectors, zero violations ({} rounding ties at the boundary under scaling)",
        VECTORS, near_ties
    ))
}

fn ac6_thread_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let set = random_set(&mut rng, 2_000, 64);
    let emb = dir.path().join("emb.txt");
    write_embeddings(&set, fs::File::create(&emb).map_err(|e| e.to_string())?, false).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out_dir = dir.path().join(format!("t{}", threads));
        let status = Command::new(env!("CARGO_BIN_EXE_word2spike"))
            .args(["--threads", threads, "encode", "--seed", "1"])
            .arg("--embeddings")
            .arg(&emb)
            .arg("--out-dir")
            .arg(&out_dir)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })?;
        outputs.push(fs::read(out_dir.join("rasters.jsonl")).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || {
        "rasters.jsonl differs between 1 and 4 threads".into()
    })?;
    Ok(format!(
        "2000 words, {} identical bytes at 1 and 4 threads",
        outputs[0].len()
    ))
}

fn analogy_fixture() -> (EmbeddingSet, Vec<AnalogyQuad>) {
    // One-hot basis: word i of family f is e_i + e_(n + f), so b - a + c lands exactly on d.
    let n = 12;
    let dim = n + 2;
    let mut words = Vec::new();
    let mut vectors = Vec::new();
    for f in 0..2 {
        for i in 0..n {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            v[n + f] = 1.0;
            words.push(format!("{}{}", if f == 0 { "m" } else { "f" }, i));
            vectors.push(v);
        }
    }
    let mut quads = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        quads.push(AnalogyQuad {
            a: format!("m{}", i),
            b: format!("f{}", i),
            c: format!("m{}", j),
            d: format!("f{}", j),
        });
    }
    (EmbeddingSet::new(words, vectors).expect("fixture"), quads)
}

fn ac7_metric_oracles() -> Outcome {
    let fixtures: [(&[f64], &[f64], f64); 7] = [
        (&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0], 0.948_683_298_050_513_9),
        (
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[5.0, 6.0, 7.0, 8.0, 7.0],
            0.820_782_681_668_123_3,
        ),
        (
            &[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0],
            &[2.0, 7.0, 1.0, 8.0, 2.0, 8.0, 1.0, 8.0],
            0.198_853_681_209_924_67,
        ),
        (&[1.0, 1.0, 2.0, 2.0, 3.0, 3.0], &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0], 0.0),
        (
            &[0.5, 0.5, 0.5, 1.0, 2.0],
            &[10.0, 9.0, 8.0, 7.0, 7.0],
            -0.860_309_002_014_606_6,
        ),
        (&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0], 1.0),
        (&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0], -1.0),
    ];
    for (xs, ys, rho) in fixtures {
        let got = spearman(xs, ys).map_err(|e| e.to_string())?;
        ensure((got - rho).abs() <= 1e-12, || {
            format!("spearman {:?} {:?}: {} vs {}", xs, ys, got, rho)
        })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = random_set(&mut rng, 100, 32);
    let vocab = WordList::from_tokens(m.words().iter().cloned());
    let overlap = overlap_at_k(&m, &m, 10, &vocab).map_err(|e| e.to_string())?;
    ensure(overlap.mean == 1.0 && overlap.used == 100, || {
        format!("self overlap {} over {} words", overlap.mean, overlap.used)
    })?;

    let (set, quads) = analogy_fixture();
    let acc = analogy_eval(&set, &quads).map_err(|e| e.to_string())?;
    ensure(acc.accuracy.value == 1.0 && acc.accuracy.used == quads.len(), || {
        format!("analogy accuracy {}", acc.accuracy.value)
    })?;
    Ok(format!(
        "{} spearman fixtures to 1e-12, overlap@10 = 1 on 100 words, analogy {}/{}",
        fixtures.len(),
        acc.accuracy.used,
        quads.len()
    ))
}

/// Human scores track original cosine with noise, so the quantized and
/// decoded correlations are meaningfully positive.
fn similarity_fixture(rng: &mut ChaCha8Rng, set: &EmbeddingSet, pairs: usize) -> Vec<SimilarityPair> {
    (0..pairs)
        .map(|_| {
            let i = rng.random_range(0..set.len());
            let mut j = rng.random_range(0..set.len());
            while j == i {
                j = rng.random_range(0..set.len());
            }
            let cos = word2spike::evaluator::cosine(set.vector(i), set.vector(j));
            SimilarityPair {
                word_a: set.words()[i].clone(),
                word_b: set.words()[j].clone(),
                human_score: 5.0 + 5.0 * cos + rng.random_range(-0.5..0.5),
            }
        })
        .collect()
}

fn ac8_report_substitute() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let set = random_set(&mut rng, 400, 48);
    let (fixture, quads) = analogy_fixture();
    // Append the analogy fixture so analogies are scored on the same file.
    let mut words: Vec<String> = set.words().to_vec();
    let mut vectors: Vec<Vec<f64>> = (0..set.len()).map(|i| set.vector(i).to_vec()).collect();
    for i in 0..fixture.len() {
        words.push(fixture.words()[i].clone());
        let mut v: Vec<f64> = (0..48).map(|_| rng.random_range(-0.05..0.05)).collect();
        for (slot, x) in v.iter_mut().zip(fixture.vector(i)) {
            *slot += x;
        }
        vectors.push(v);
    }
    let set = EmbeddingSet::new(words, vectors).map_err(|e| e.to_string())?;
    let data = Datasets {
        simlex: Some(similarity_fixture(&mut rng, &set, 600)),
        analogies: Some(quads),
        overlap_vocab: None,
    };
    let opts = ReportOptions::default();

    let lossless = full_report(&set, &CodecConfig::default().with_mode(Mode::Lossless), &data, &opts)
        .map_err(|e| e.to_string())?;
    let (q, s) = (&lossless.quantized, &lossless.spike);
    ensure(
        q.simlex_rho == s.simlex_rho && q.analogy_accuracy == s.analogy_accuracy && q.overlap_at_k == s.overlap_at_k,
        || format!("lossless columns differ: {:?} vs {:?}", q, s),
    )?;
    ensure(s.reconstruction_accuracy == Some(1.0), || {
        "lossless reconstruction below 100%".into()
    })?;

    let quantized_rho = q.simlex_rho.as_ref().ok_or("no simlex score")?.value;
    let mut rhos = Vec::new();
    for seed in 1..=5u64 {
        let cfg = CodecConfig::default().with_seed(seed);
        let report = full_report(&set, &cfg, &data, &opts).map_err(|e| e.to_string())?;
        rhos.push(report.spike.simlex_rho.ok_or("no simlex score")?.value);
    }
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    let spread = rhos.iter().cloned().fold(f64::MIN, f64::max) - rhos.iter().cloned().fold(f64::MAX, f64::min);
    ensure(mean <= quantized_rho + spread, || {
        format!(
            "decoded rho {:.4} > quantized {:.4} + spread {:.4}",
            mean, quantized_rho, spread
        )
    })?;
    Ok(format!(
        "lossless columns identical; stochastic rho {:.4} (spread {:.4} over 5 seeds) vs quantized {:.4}",
        mean, spread, quantized_rho
    ))
}

fn ac9_long_window_preset() -> Outcome {
    let (_, json) = word2spike_cli::render_analysis(&CodecConfig::paper_400ms(), None).map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let total = report["total_error"].as_f64().ok_or("total_error missing")?;
    ensure(total < 1e-3, || format!("total error {}", total))?;
    Ok(format!("total per-dimension error {:.3e}", total))
}

fn main() {
    let checks: [Check; 9] = [
        ("AC1 lossless round-trip", ac1_lossless_roundtrip),
        ("AC2 stochastic calibration", ac2_stochastic_calibration),
        ("AC3 rate spread and counts", ac3_rate_numerics),
        ("AC4 poisson exactness", ac4_poisson_exactness),
        ("AC5 quantizer properties", ac5_quantizer_properties),
        ("AC6 thread determinism", ac6_thread_determinism),
        ("AC7 metric oracles", ac7_metric_oracles),
        ("AC8 lossless report and seed spread", ac8_report_substitute),
        ("AC9 400 ms preset error", ac9_long_window_preset),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {} ({:.2?}): {}", name, start.elapsed(), detail),
            Err(why) => {
                failed += 1;
                println!("FAIL {} ({:.2?}): {}", name, start.elapsed(), why);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
