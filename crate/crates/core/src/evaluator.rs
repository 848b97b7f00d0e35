//! Semantic fidelity metrics for original, quantized and spike-decoded
//! representations.
//!
//! All similarity is cosine. A zero vector has similarity 0 with everything
//! and never appears in a neighbor list. Neighbor ties are broken by token
//! order so results do not depend on scheduling.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{misclassification_probabilities, ErrorAnalysis};
use crate::codec::{encode, estimate_rates, roundtrip_with, word_stream_id, CodecConfig, Mode};
use crate::corpus_io::{AnalogyQuad, EmbeddingSet, SimilarityPair, WordList};
use crate::error::{Error, Result};
use crate::quantizer::{QuantizeOptions, TernarySet};

/// Cosine similarity, or `None` when either vector has zero norm.
pub fn cosine_checked(u: &[f64], v: &[f64]) -> Option<f64> {
    assert_eq!(u.len(), v.len(), "cosine of vectors with different lengths");
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    Some((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine similarity; 0 if either vector is all zeros.
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    cosine_checked(u, v).unwrap_or(0.0)
}

/// Fractional ranks starting at 1; tied values share their mean rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) hold equal values
        let rank = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        i = j;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Invalid(format!(
            "spearman inputs differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Degenerate("spearman needs at least two observations".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
        .ok_or_else(|| Error::Degenerate("spearman input is constant".into()))
}

/// A metric value with the number of dataset items used and skipped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coverage {
    pub value: f64,
    pub used: usize,
    pub skipped: usize,
}

/// Spearman correlation between model cosines and human scores over the
/// pairs whose words are both in the vocabulary.
pub fn simlex_eval(set: &EmbeddingSet, pairs: &[SimilarityPair]) -> Result<Coverage> {
    if pairs.is_empty() {
        return Err(Error::Empty("similarity dataset".into()));
    }
    let mut model = Vec::new();
    let mut human = Vec::new();
    let mut zero = 0;
    for p in pairs {
        if let (Some(a), Some(b)) = (set.get(&p.word_a), set.get(&p.word_b)) {
            let c = cosine_checked(a, b);
            zero += c.is_none() as usize;
            model.push(c.unwrap_or(0.0));
            human.push(p.human_score);
        }
    }
    if zero > 0 {
        log::warn!("{} similarity pairs involve an all-zero vector; scored as 0", zero);
    }
    if model.len() < 2 {
        return Err(Error::EmptyResult(format!(
            "only {} of {} similarity pairs are in the vocabulary",
            model.len(),
            pairs.len()
        )));
    }
    Ok(Coverage {
        value: spearman(&model, &human)?,
        used: model.len(),
        skipped: pairs.len() - model.len(),
    })
}

/// Brute-force cosine search over one representation.
pub struct NeighborIndex<'a> {
    set: &'a EmbeddingSet,
    norms: Vec<f64>,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(set: &'a EmbeddingSet) -> Self {
        let norms = (0..set.len())
            .map(|i| set.vector(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        NeighborIndex { set, norms }
    }

    pub fn set(&self) -> &EmbeddingSet {
        self.set
    }

    pub fn zero_vectors(&self) -> usize {
        self.norms.iter().filter(|&&n| n == 0.0).count()
    }

    /// Top `k` indices by cosine to `query`, skipping `exclude` and zero vectors.
    fn search(&self, query: &[f64], k: usize, exclude: &[usize]) -> Vec<usize> {
        let qn = query.iter().map(|x| x * x).sum::<f64>().sqrt();
        if qn == 0.0 || k == 0 {
            return Vec::new();
        }
        let words = self.set.words();
        let mut scored: Vec<(f64, usize)> = (0..self.set.len())
            .filter(|j| self.norms[*j] > 0.0 && !exclude.contains(j))
            .map(|j| {
                let dot: f64 = query.iter().zip(self.set.vector(j)).map(|(a, b)| a * b).sum();
                (dot / (qn * self.norms[j]), j)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            b.0.total_cmp(&a.0).then_with(|| words[a.1].cmp(&words[b.1]))
        };
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_by(cmp);
        scored.into_iter().map(|(_, j)| j).collect()
    }

    fn neighbors_of(&self, i: usize, k: usize) -> Vec<usize> {
        if self.norms[i] == 0.0 {
            return Vec::new();
        }
        self.search(self.set.vector(i), k, &[i])
    }

    /// Neighbor lists for every word, as tokens.
    pub fn table(&self, k: usize) -> Vec<Vec<&'a str>> {
        let set = self.set;
        (0..set.len())
            .into_par_iter()
            .map(|i| {
                self.neighbors_of(i, k)
                    .into_iter()
                    .map(|j| set.words()[j].as_str())
                    .collect()
            })
            .collect()
    }
}

/// Top `k` words by cosine to `query`, excluding the query itself.
pub fn neighbors(set: &EmbeddingSet, query: &str, k: usize) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let i = set
        .index_of(query)
        .ok_or_else(|| Error::OutOfVocabulary(query.to_owned()))?;
    let index = NeighborIndex::new(set);
    if index.norms[i] == 0.0 {
        log::warn!("'{}' has an all-zero vector and no neighbors", query);
    }
    Ok(index
        .neighbors_of(i, k)
        .into_iter()
        .map(|j| set.words()[j].clone())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapResult {
    pub k: usize,
    pub mean: f64,
    pub used: usize,
    pub skipped: usize,
    /// `(word, overlap)` for every word that was scored.
    #[serde(skip)]
    pub per_word: Vec<(String, f64)>,
}

/// Mean neighbor-list overlap between two precomputed neighbor tables.
///
/// Each word scores `|A ∩ B| / max(|A|, |B|)`, which is `|A ∩ B| / k`
/// whenever both lists are full. Words missing from either table, or with no
/// neighbors in either, are skipped.
pub fn overlap_from_tables(
    a: (&EmbeddingSet, &[Vec<&str>]),
    b: (&EmbeddingSet, &[Vec<&str>]),
    k: usize,
    vocab: &WordList,
) -> Result<OverlapResult> {
    let mut per_word = Vec::new();
    let mut skipped = 0;
    for word in vocab.tokens() {
        let (Some(ia), Some(ib)) = (a.0.index_of(word), b.0.index_of(word)) else {
            skipped += 1;
            continue;
        };
        let (la, lb) = (&a.1[ia], &b.1[ib]);
        let denom = la.len().max(lb.len());
        if denom == 0 {
            skipped += 1;
            continue;
        }
        let set_a: HashSet<&str> = la.iter().copied().collect();
        let shared = lb.iter().filter(|w| set_a.contains(*w)).count();
        per_word.push((word.clone(), shared as f64 / denom as f64));
    }
    if per_word.is_empty() {
        return Err(Error::EmptyResult("no shared vocabulary for neighbor overlap".into()));
    }
    if skipped > 0 {
        log::warn!("neighbor overlap skipped {} words (missing or all-zero)", skipped);
    }
    let mean = per_word.iter().map(|(_, o)| o).sum::<f64>() / per_word.len() as f64;
    Ok(OverlapResult {
        k,
        mean,
        used: per_word.len(),
        skipped,
        per_word,
    })
}

/// Mean fraction of shared top-`k` neighbors between two representations.
pub fn overlap_at_k(a: &EmbeddingSet, b: &EmbeddingSet, k: usize, vocab: &WordList) -> Result<OverlapResult> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let ta = NeighborIndex::new(a).table(k);
    let tb = NeighborIndex::new(b).table(k);
    overlap_from_tables((a, &ta), (b, &tb), k, vocab)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalogyOutcome {
    pub quad: AnalogyQuad,
    /// `None` when the quad was skipped or no candidate exists.
    pub predicted: Option<String>,
    pub correct: bool,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalogyResult {
    pub accuracy: Coverage,
    #[serde(skip)]
    pub outcomes: Vec<AnalogyOutcome>,
}

/// 3CosAdd: predict the word nearest to `b - a + c`, excluding `a`, `b`, `c`.
pub fn analogy_eval(set: &EmbeddingSet, quads: &[AnalogyQuad]) -> Result<AnalogyResult> {
    if quads.is_empty() {
        return Err(Error::Empty("analogy dataset".into()));
    }
    let index = NeighborIndex::new(set);
    let outcomes: Vec<AnalogyOutcome> = quads
        .par_iter()
        .map(|q| {
            let ids: Option<Vec<usize>> = q.words().iter().map(|w| set.index_of(w)).collect();
            let Some(ids) = ids else {
                return AnalogyOutcome {
                    quad: q.clone(),
                    predicted: None,
                    correct: false,
                    skipped: true,
                };
            };
            let (a, b, c) = (set.vector(ids[0]), set.vector(ids[1]), set.vector(ids[2]));
            let target: Vec<f64> = (0..set.dim()).map(|i| b[i] - a[i] + c[i]).collect();
            let predicted = index
                .search(&target, 1, &ids[..3])
                .first()
                .map(|&j| set.words()[j].clone());
            AnalogyOutcome {
                correct: predicted.as_deref() == Some(q.d.as_str()),
                quad: q.clone(),
                predicted,
                skipped: false,
            }
        })
        .collect();
    let used = outcomes.iter().filter(|o| !o.skipped).count();
    if used == 0 {
        return Err(Error::EmptyResult(format!(
            "all {} analogies contain out-of-vocabulary words",
            quads.len()
        )));
    }
    let correct = outcomes.iter().filter(|o| o.correct).count();
    Ok(AnalogyResult {
        accuracy: Coverage {
            value: correct as f64 / used as f64,
            used,
            skipped: quads.len() - used,
        },
        outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reconstruction {
    /// Fraction of words recovered in every dimension.
    pub word_exact: f64,
    pub per_dimension: f64,
    /// Counts indexed `[encoded][decoded]`, symbols ordered `-1, 0, +1`.
    pub confusion: [[u64; 3]; 3],
}

pub fn reconstruction_accuracy(ternary: &TernarySet, decoded: &TernarySet) -> Result<Reconstruction> {
    if ternary.words() != decoded.words() {
        return Err(Error::VocabularyMismatch(
            "decoded set does not have the same words in the same order".into(),
        ));
    }
    if ternary.dim() != decoded.dim() {
        return Err(Error::VocabularyMismatch(format!(
            "dimensionality {} vs {}",
            ternary.dim(),
            decoded.dim()
        )));
    }
    let mut confusion = [[0u64; 3]; 3];
    let mut exact = 0usize;
    for (a, b) in ternary.vectors().iter().zip(decoded.vectors()) {
        let mut all = true;
        for (x, y) in a.values().iter().zip(b.values()) {
            confusion[x.index()][y.index()] += 1;
            all &= x == y;
        }
        exact += all as usize;
    }
    let total: u64 = confusion.iter().flatten().sum();
    let diag: u64 = (0..3).map(|i| confusion[i][i]).sum();
    Ok(Reconstruction {
        word_exact: exact as f64 / ternary.len() as f64,
        per_dimension: diag as f64 / total as f64,
        confusion,
    })
}

/// Which vectors stand in for the spike representation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpikeView {
    /// Decoded ternary codes.
    #[default]
    Decoded,
    /// Raw estimated firing rates, for comparison.
    EstimatedRates,
}

#[derive(Clone, Debug, Default)]
pub struct Datasets {
    pub simlex: Option<Vec<SimilarityPair>>,
    pub analogies: Option<Vec<AnalogyQuad>>,
    /// Words scored for neighbor overlap; defaults to the whole vocabulary.
    pub overlap_vocab: Option<WordList>,
}

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    pub k: usize,
    pub quantize: QuantizeOptions,
    pub spike_view: SpikeView,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            k: 10,
            quantize: QuantizeOptions::default(),
            spike_view: SpikeView::Decoded,
        }
    }
}

/// Metrics for one representation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub representation: String,
    pub simlex_rho: Option<Coverage>,
    pub analogy_accuracy: Option<Coverage>,
    /// Neighbor overlap against the original representation.
    pub overlap_at_k: Option<OverlapResult>,
    pub reconstruction_accuracy: Option<f64>,
}

/// Values published for a 3072-dimension commercial embedding model over
/// 10,000 frequent English words. Annotations only; they depend on that model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceValues {
    pub note: &'static str,
    pub simlex_rho: [f64; 3],
    pub analogy_accuracy: [f64; 3],
    pub overlap_at_10: [f64; 3],
    pub reconstruction_accuracy: [Option<f64>; 3],
}

impl Default for ReferenceValues {
    fn default() -> Self {
        ReferenceValues {
            note: "published values for text-embedding-3-large (original, quantized, spike-based); not comparable to other embeddings",
            simlex_rho: [0.540, 0.542, 0.526],
            analogy_accuracy: [0.375, 0.375, 0.375],
            overlap_at_10: [0.885, 0.885, 0.727],
            reconstruction_accuracy: [None, None, Some(1.0)],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FullReport {
    pub config: CodecConfig,
    pub spike_view: SpikeView,
    pub words: usize,
    pub dim: usize,
    pub original: EvalReport,
    pub quantized: EvalReport,
    pub spike: EvalReport,
    pub reconstruction: Reconstruction,
    /// Stochastic-channel error rates implied by the codec configuration.
    pub expected_errors: ErrorAnalysis,
    pub zero_vectors: [usize; 3],
    pub reference: ReferenceValues,
    #[serde(skip)]
    pub analogy_outcomes: [Vec<AnalogyOutcome>; 3],
}

fn evaluate(
    name: &str,
    set: &EmbeddingSet,
    table: &[Vec<&str>],
    original: Option<(&EmbeddingSet, &[Vec<&str>])>,
    data: &Datasets,
    vocab: &WordList,
    k: usize,
) -> Result<(EvalReport, Vec<AnalogyOutcome>)> {
    let simlex_rho = data.simlex.as_deref().map(|p| simlex_eval(set, p)).transpose()?;
    let analogy = data.analogies.as_deref().map(|q| analogy_eval(set, q)).transpose()?;
    let overlap_at_k = original
        .map(|o| overlap_from_tables(o, (set, table), k, vocab))
        .transpose()?;
    let (analogy_accuracy, outcomes) = match analogy {
        Some(a) => (Some(a.accuracy), a.outcomes),
        None => (None, Vec::new()),
    };
    Ok((
        EvalReport {
            representation: name.to_owned(),
            simlex_rho,
            analogy_accuracy,
            overlap_at_k,
            reconstruction_accuracy: None,
        },
        outcomes,
    ))
}

/// Quantize, encode and decode `original`, then score all three representations.
pub fn full_report(
    original: &EmbeddingSet,
    cfg: &CodecConfig,
    data: &Datasets,
    opts: &ReportOptions,
) -> Result<FullReport> {
    if opts.k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let rt = roundtrip_with(original, cfg, &opts.quantize)?;
    let reconstruction = reconstruction_accuracy(&rt.ternary, &rt.decoded)?;
    let quantized = rt.ternary.to_embedding_set();
    let spike = match opts.spike_view {
        SpikeView::Decoded => rt.decoded.to_embedding_set(),
        SpikeView::EstimatedRates => {
            let rows: Vec<Vec<f64>> = rt
                .ternary
                .iter()
                .collect::<Vec<_>>()
                .par_iter()
                .map(|(w, v)| estimate_rates(&encode(v, cfg, word_stream_id(w))).0)
                .collect();
            EmbeddingSet::new(rt.ternary.words().to_vec(), rows)?
        }
    };

    let vocab = data
        .overlap_vocab
        .clone()
        .unwrap_or_else(|| WordList::from_tokens(original.words().iter().cloned()));
    let k = opts.k;
    let idx_o = NeighborIndex::new(original);
    let idx_q = NeighborIndex::new(&quantized);
    let idx_s = NeighborIndex::new(&spike);
    let t_o = idx_o.table(k);
    let t_q = idx_q.table(k);
    let t_s = if spike == quantized {
        t_q.clone()
    } else {
        idx_s.table(k)
    };
    let zero_vectors = [idx_o.zero_vectors(), idx_q.zero_vectors(), idx_s.zero_vectors()];
    if zero_vectors[1] > 0 || zero_vectors[2] > 0 {
        log::warn!(
            "{} quantized and {} spike vectors are all zero and are excluded from neighbor rankings",
            zero_vectors[1],
            zero_vectors[2]
        );
    }

    let base = (original, t_o.as_slice());
    let (orig_report, orig_out) = evaluate("original", original, &t_o, None, data, &vocab, k)?;
    let (quant_report, quant_out) = evaluate("quantized", &quantized, &t_q, Some(base), data, &vocab, k)?;
    let (mut spike_report, spike_out) = evaluate("spike", &spike, &t_s, Some(base), data, &vocab, k)?;
    spike_report.reconstruction_accuracy = Some(reconstruction.word_exact);

    Ok(FullReport {
        config: *cfg,
        spike_view: opts.spike_view,
        words: original.len(),
        dim: original.dim(),
        original: orig_report,
        quantized: quant_report,
        spike: spike_report,
        reconstruction,
        expected_errors: misclassification_probabilities(&cfg.with_mode(Mode::Stochastic))?,
        zero_vectors,
        reference: ReferenceValues::default(),
        analogy_outcomes: [orig_out, quant_out, spike_out],
    })
}

impl FullReport {
    fn columns(&self) -> [&EvalReport; 3] {
        [&self.original, &self.quantized, &self.spike]
    }

    /// Aligned text table with one row per metric and one column per representation.
    pub fn render_table(&self) -> String {
        fn cell<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
            v.map(f).unwrap_or_else(|| "N/A".into())
        }
        let analogies = self
            .columns()
            .iter()
            .find_map(|r| r.analogy_accuracy.map(|c| c.used + c.skipped))
            .unwrap_or(0);
        let rows: Vec<(String, [String; 3])> = vec![
            (
                "SimLex-999 (Spearman's rho)".into(),
                self.columns()
                    .map(|r| cell(r.simlex_rho, |c| format!("{:.3}", c.value))),
            ),
            (
                format!("Analogy accuracy ({} analogies)", analogies),
                self.columns()
                    .map(|r| cell(r.analogy_accuracy, |c| format!("{:.2}%", 100.0 * c.value))),
            ),
            (
                format!(
                    "Nearest-neighbor consistency (overlap@{})",
                    self.quantized.overlap_at_k.as_ref().map_or(10, |o| o.k)
                ),
                self.columns()
                    .map(|r| cell(r.overlap_at_k.as_ref(), |o| format!("{:.3}", o.mean))),
            ),
            (
                "Reconstruction accuracy".into(),
                self.columns()
                    .map(|r| cell(r.reconstruction_accuracy, |v| format!("{:.2}%", 100.0 * v))),
            ),
        ];
        let header = ["Original", "Quantized", "Spike-based"];
        let w0 = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(6).max(6);
        let mut out = format!(
            "{:<w0$}  {:>11}  {:>11}  {:>11}\n",
            "Metric", header[0], header[1], header[2]
        );
        out.push_str(&"-".repeat(w0 + 39));
        out.push('\n');
        for (name, cells) in &rows {
            out.push_str(&format!(
                "{:<w0$}  {:>11}  {:>11}  {:>11}\n",
                name, cells[0], cells[1], cells[2]
            ));
        }
        out.push('\n');
        let c = &self.reconstruction.confusion;
        out.push_str(&format!(
            "{} words x {} dims, mode {}, per-dimension accuracy {:.4}%\n",
            self.words,
            self.dim,
            self.config.mode,
            100.0 * self.reconstruction.per_dimension
        ));
        out.push_str("confusion (rows encoded -1/0/+1, columns decoded -1/0/+1):\n");
        for (label, row) in ["-1", " 0", "+1"].iter().zip(c) {
            out.push_str(&format!("  {} {:>10} {:>10} {:>10}\n", label, row[0], row[1], row[2]));
        }
        for r in self.columns() {
            if let Some(s) = r.simlex_rho {
                out.push_str(&format!(
                    "{}: simlex pairs used {}, skipped {}\n",
                    r.representation, s.used, s.skipped
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(rows: &[(&str, &[f64])]) -> EmbeddingSet {
        EmbeddingSet::new(
            rows.iter().map(|(w, _)| w.to_string()).collect(),
            rows.iter().map(|(_, v)| v.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&[0.3, -2.0], &[0.3, -2.0]) - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[1.0, 1.0], &[1.0, -1.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
        assert_eq!(cosine_checked(&[0.0], &[1.0]), None);
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap() + 1.0).abs() < 1e-15);
        let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((rho - 0.948_683_298_050_513_9).abs() < 1e-12);
        assert!(matches!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::Degenerate(_))));
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn neighbor_ties_are_lexicographic() {
        let s = set(&[("q", &[1.0, 0.0]), ("b", &[1.0, 0.0]), ("a", &[1.0, 0.0])]);
        assert_eq!(neighbors(&s, "q", 2).unwrap(), vec!["a", "b"]);
        assert_eq!(neighbors(&s, "q", 10).unwrap().len(), 2);
        assert!(matches!(neighbors(&s, "zzz", 1), Err(Error::OutOfVocabulary(_))));
    }

    #[test]
    fn nearest_duplicate_first() {
        let s = set(&[
            ("q", &[1.0, 2.0, 3.0]),
            ("far", &[-1.0, 0.0, 0.0]),
            ("twin", &[1.0, 2.0, 3.0]),
            ("near", &[1.0, 2.0, 2.5]),
            ("zero", &[0.0, 0.0, 0.0]),
        ]);
        assert_eq!(neighbors(&s, "q", 3).unwrap(), vec!["twin", "near", "far"]);
        assert!(neighbors(&s, "zero", 3).unwrap().is_empty());
    }

    #[test]
    fn simlex_perfect_and_oov() {
        let s = set(&[
            ("a", &[1.0, 0.0]),
            ("b", &[1.0, 0.1]),
            ("c", &[1.0, 1.0]),
            ("d", &[0.0, 1.0]),
        ]);
        let pair = |x: &str, y: &str, h| SimilarityPair {
            word_a: x.into(),
            word_b: y.into(),
            human_score: h,
        };
        let pairs = vec![
            pair("a", "b", 9.0),
            pair("a", "c", 5.0),
            pair("a", "d", 1.0),
            pair("a", "x", 3.0),
        ];
        let r = simlex_eval(&s, &pairs).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!((r.used, r.skipped), (3, 1));
        assert!(simlex_eval(&s, &[pair("x", "y", 1.0), pair("y", "z", 2.0)]).is_err());
    }

    #[test]
    fn overlap_cases() {
        let s = set(&[
            ("a", &[1.0, 0.0]),
            ("b", &[0.9, 0.1]),
            ("c", &[0.0, 1.0]),
            ("d", &[0.1, 0.9]),
        ]);
        let all = WordList::from_tokens(["a", "b", "c", "d"]);
        assert_eq!(overlap_at_k(&s, &s, 1, &all).unwrap().mean, 1.0);
        // swap the pairing: a<->c, b<->d neighborhoods become disjoint
        let t = set(&[
            ("a", &[1.0, 0.0]),
            ("c", &[0.9, 0.1]),
            ("b", &[0.0, 1.0]),
            ("d", &[0.1, 0.9]),
        ]);
        assert_eq!(overlap_at_k(&s, &t, 1, &all).unwrap().mean, 0.0);
        assert!(overlap_at_k(&s, &t, 1, &WordList::from_tokens(["zz"])).is_err());
    }

    #[test]
    fn analogy_exact_construction() {
        let s = set(&[
            ("man", &[1.0, 0.0, 0.0]),
            ("king", &[1.0, 1.0, 0.0]),
            ("woman", &[0.0, 0.0, 1.0]),
            ("queen", &[0.0, 1.0, 1.0]),
            ("apple", &[0.3, -1.0, 0.2]),
        ]);
        let quad = |a: &str, b: &str, c: &str, d: &str| AnalogyQuad {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        };
        let r = analogy_eval(
            &s,
            &[quad("man", "king", "woman", "queen"), quad("man", "king", "girl", "x")],
        )
        .unwrap();
        assert_eq!(r.accuracy.value, 1.0);
        assert_eq!((r.accuracy.used, r.accuracy.skipped), (1, 1));
        assert!(r.outcomes[1].skipped);
        assert!(analogy_eval(&s, &[quad("x", "y", "z", "w")]).is_err());
    }

    #[test]
    fn reconstruction_counts() {
        use crate::quantizer::{TernaryVector, Trit::*};
        let words = vec!["a".to_string(), "b".to_string()];
        let t = TernarySet::new(
            words.clone(),
            vec![
                TernaryVector::from_codes(vec![Plus, Minus, Zero]),
                TernaryVector::from_codes(vec![Minus, Minus, Plus]),
            ],
        )
        .unwrap();
        let same = reconstruction_accuracy(&t, &t).unwrap();
        assert_eq!(same.word_exact, 1.0);
        assert_eq!(same.confusion, [[3, 0, 0], [0, 1, 0], [0, 0, 2]]);

        let flipped = TernarySet::new(
            words,
            vec![
                TernaryVector::from_codes(vec![Plus, Plus, Zero]),
                TernaryVector::from_codes(vec![Minus, Minus, Plus]),
            ],
        )
        .unwrap();
        let r = reconstruction_accuracy(&t, &flipped).unwrap();
        assert_eq!(r.word_exact, 0.5);
        assert_eq!(r.confusion[0][2], 1);
        assert!((r.per_dimension - 5.0 / 6.0).abs() < 1e-15);

        let other = TernarySet::new(vec!["z".into()], vec![TernaryVector::from_codes(vec![Zero; 3])]).unwrap();
        assert!(matches!(
            reconstruction_accuracy(&t, &other),
            Err(Error::VocabularyMismatch(_))
        ));
    }

    #[test]
    fn tiny_report_smoke() {
        let s = set(&[
            ("a", &[1.0, -0.2, 0.1, 0.0]),
            ("b", &[0.9, -0.1, 0.3, 0.2]),
            ("c", &[-0.5, 1.0, 0.2, 0.1]),
            ("d", &[0.0, 0.3, -1.0, 0.8]),
            ("e", &[0.2, 0.2, 0.2, -1.0]),
        ]);
        let cfg = CodecConfig::default().with_mode(Mode::Lossless);
        let r = full_report(
            &s,
            &cfg,
            &Datasets::default(),
            &ReportOptions {
                k: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.spike.reconstruction_accuracy, Some(1.0));
        assert_eq!(r.quantized.overlap_at_k, r.spike.overlap_at_k);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"reconstruction\""));
        assert!(r.render_table().contains("Reconstruction accuracy"));
    }

    proptest! {
        #[test]
        fn spearman_monotone_invariance(
            pts in prop::collection::vec((-100i32..100, -100i32..100), 3..30)
        ) {
            let xs: Vec<f64> = pts.iter().map(|p| f64::from(p.0)).collect();
            let ys: Vec<f64> = pts.iter().map(|p| f64::from(p.1)).collect();
            if let Ok(rho) = spearman(&xs, &ys) {
                let tx: Vec<f64> = xs.iter().map(|x| (x / 50.0).exp() * 3.0 + 1.0).collect();
                let ty: Vec<f64> = ys.iter().map(|y| y * y * y + 7.0).collect();
                let rho2 = spearman(&tx, &ty).unwrap();
                prop_assert!((rho - rho2).abs() < 1e-12);
            }
        }

        #[test]
        fn analogy_scale_invariance(seed in 0u64..500, scale in 0.01f64..100.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let words: Vec<String> = (0..12).map(|i| format!("w{i}")).collect();
            let rows: Vec<Vec<f64>> = (0..12).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let s = EmbeddingSet::new(words.clone(), rows).unwrap();
            let quads: Vec<AnalogyQuad> = (0..8).map(|i| AnalogyQuad {
                a: words[i].clone(), b: words[i + 1].clone(), c: words[i + 2].clone(), d: words[i + 3].clone(),
            }).collect();
            let a = analogy_eval(&s, &quads).unwrap();
            let b = analogy_eval(&s.scaled(scale), &quads).unwrap();
            prop_assert_eq!(a.accuracy.value, b.accuracy.value);
        }
    }
}
