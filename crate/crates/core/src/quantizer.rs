//! Absmean ternarization.
//!
//! A vector is scaled by its mean absolute value `gamma` and each component
//! is mapped to `+1` if it lies strictly above `gamma`, `-1` if strictly below
//! `-gamma`, and `0` otherwise. Components sitting exactly on `±gamma` map
//! to zero.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Neg;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{read_embeddings, EmbeddingSet, HeaderMode, LoadOptions};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
#[repr(i8)]
pub enum Trit {
    Minus = -1,
    Zero = 0,
    Plus = 1,
}

impl Trit {
    pub const ALL: [Trit; 3] = [Trit::Minus, Trit::Zero, Trit::Plus];

    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// Index into `ALL`, i.e. `value + 1`.
    pub fn index(self) -> usize {
        (self.value() + 1) as usize
    }
}

impl From<Trit> for i8 {
    fn from(t: Trit) -> i8 {
        t.value()
    }
}

impl TryFrom<i8> for Trit {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Trit::Minus),
            0 => Ok(Trit::Zero),
            1 => Ok(Trit::Plus),
            _ => Err(Error::Invalid(format!("{} is not a ternary value", v))),
        }
    }
}

impl Neg for Trit {
    type Output = Trit;

    fn neg(self) -> Trit {
        match self {
            Trit::Minus => Trit::Plus,
            Trit::Zero => Trit::Zero,
            Trit::Plus => Trit::Minus,
        }
    }
}

impl fmt::Display for Trit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Ternary codes plus the scale they were produced with. Decoded vectors
/// carry no scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TernaryVector {
    values: Vec<Trit>,
    gamma: Option<f64>,
}

impl TernaryVector {
    pub fn new(values: Vec<Trit>, gamma: Option<f64>) -> Result<Self> {
        if let Some(g) = gamma {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::Invalid(format!(
                    "gamma must be finite and nonnegative, got {}",
                    g
                )));
            }
            if g == 0.0 && values.iter().any(|&t| t != Trit::Zero) {
                return Err(Error::Invalid("gamma = 0 requires an all-zero vector".into()));
            }
        }
        Ok(TernaryVector { values, gamma })
    }

    /// Codes without a recorded scale.
    pub fn from_codes(values: Vec<Trit>) -> Self {
        TernaryVector { values, gamma: None }
    }

    pub fn values(&self) -> &[Trit] {
        &self.values
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|t| t.as_f64()).collect()
    }

    pub fn composition(&self) -> Composition {
        let mut c = Composition::default();
        for t in &self.values {
            match t {
                Trit::Plus => c.plus += 1,
                Trit::Minus => c.minus += 1,
                Trit::Zero => c.zero += 1,
            }
        }
        c
    }
}

impl Neg for &TernaryVector {
    type Output = TernaryVector;

    fn neg(self) -> TernaryVector {
        TernaryVector {
            values: self.values.iter().map(|&t| -t).collect(),
            gamma: self.gamma,
        }
    }
}

/// Symbol counts of a ternary vector or set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Composition {
    pub fn total(&self) -> usize {
        self.plus + self.minus + self.zero
    }
}

impl std::ops::Add for Composition {
    type Output = Composition;

    fn add(self, o: Composition) -> Composition {
        Composition {
            plus: self.plus + o.plus,
            minus: self.minus + o.minus,
            zero: self.zero + o.zero,
        }
    }
}

/// Mean absolute value of `v`.
pub fn absmean_gamma(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Empty("vector".into()));
    }
    Ok(v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64)
}

pub fn quantize(v: &[f64]) -> Result<TernaryVector> {
    let gamma = absmean_gamma(v)?;
    Ok(quantize_with_gamma(v, gamma))
}

/// Ternarize against an externally supplied scale.
pub fn quantize_with_gamma(v: &[f64], gamma: f64) -> TernaryVector {
    let values = v
        .iter()
        .map(|&w| {
            if w > gamma {
                Trit::Plus
            } else if w < -gamma {
                Trit::Minus
            } else {
                Trit::Zero
            }
        })
        .collect();
    TernaryVector {
        values,
        gamma: Some(gamma),
    }
}

/// Where the absmean scale is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaScope {
    /// One gamma per word vector.
    #[default]
    PerVector,
    /// One gamma over the whole vocabulary matrix.
    PerMatrix,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizeOptions {
    pub scope: GammaScope,
    /// Scale each vector to unit L2 norm first.
    pub l2_normalize: bool,
}

/// A vocabulary of ternary vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TernarySet {
    words: Vec<String>,
    vectors: Vec<TernaryVector>,
    dim: usize,
}

impl TernarySet {
    pub fn new(words: Vec<String>, vectors: Vec<TernaryVector>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Empty("ternary set".into()));
        }
        if words.len() != vectors.len() {
            return Err(Error::Invalid(format!(
                "{} words but {} vectors",
                words.len(),
                vectors.len()
            )));
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(Error::Invalid(
                "ternary vectors must have at least one dimension".into(),
            ));
        }
        if let Some((w, v)) = words.iter().zip(&vectors).find(|(_, v)| v.len() != dim) {
            return Err(Error::Invalid(format!(
                "vector for '{}' has {} dimensions, expected {}",
                w,
                v.len(),
                dim
            )));
        }
        let mut seen = HashSet::with_capacity(words.len());
        if let Some(w) = words.iter().find(|w| !seen.insert(w.as_str())) {
            return Err(Error::Invalid(format!("duplicate token '{}'", w)));
        }
        Ok(TernarySet { words, vectors, dim })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vectors(&self) -> &[TernaryVector] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TernaryVector)> + '_ {
        self.words.iter().map(String::as_str).zip(&self.vectors)
    }

    pub fn composition(&self) -> Composition {
        self.vectors
            .iter()
            .map(TernaryVector::composition)
            .fold(Composition::default(), |a, b| a + b)
    }

    /// Codes as `f64` components, for similarity metrics.
    pub fn to_embedding_set(&self) -> EmbeddingSet {
        let data = self.vectors.iter().flat_map(|v| v.to_f64()).collect();
        EmbeddingSet::from_flat(self.words.clone(), data, self.dim)
            .expect("ternary set invariants imply a valid embedding set")
    }

    /// Replace recorded scales from a `word -> gamma` table.
    pub fn with_gammas(mut self, gammas: &[(String, f64)]) -> Result<Self> {
        let lookup: std::collections::HashMap<&str, f64> = gammas.iter().map(|(w, g)| (w.as_str(), *g)).collect();
        for (w, v) in self.words.iter().zip(self.vectors.iter_mut()) {
            if let Some(&g) = lookup.get(w.as_str()) {
                *v = TernaryVector::new(std::mem::take(&mut v.values), Some(g))?;
            }
        }
        Ok(self)
    }
}

pub fn quantize_all(set: &EmbeddingSet) -> TernarySet {
    quantize_all_with(set, &QuantizeOptions::default())
}

pub fn quantize_all_with(set: &EmbeddingSet, opts: &QuantizeOptions) -> TernarySet {
    let prepare = |v: &[f64]| -> Vec<f64> {
        if opts.l2_normalize {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                return v.iter().map(|x| x / norm).collect();
            }
        }
        v.to_vec()
    };

    let matrix_gamma = match opts.scope {
        GammaScope::PerVector => None,
        GammaScope::PerMatrix => {
            let total: f64 = (0..set.len())
                .map(|i| prepare(set.vector(i)).iter().map(|x| x.abs()).sum::<f64>())
                .sum();
            Some(total / (set.len() * set.dim()) as f64)
        }
    };

    let vectors = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let v = prepare(set.vector(i));
            match matrix_gamma {
                Some(g) => quantize_with_gamma(&v, g),
                None => quantize(&v).expect("embedding vectors are nonempty"),
            }
        })
        .collect();

    TernarySet {
        words: set.words().to_vec(),
        vectors,
        dim: set.dim(),
    }
}

/// Write codes in the embedding text format (values -1, 0, 1).
pub fn write_ternary<W: Write>(set: &TernarySet, mut writer: W) -> std::io::Result<()> {
    for (word, v) in set.iter() {
        write!(writer, "{}", word)?;
        for t in v.values() {
            write!(writer, " {}", t)?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Write the `word<TAB>gamma` sidecar. Words without a recorded scale are omitted.
pub fn write_gammas<W: Write>(set: &TernarySet, mut writer: W) -> std::io::Result<()> {
    for (word, v) in set.iter() {
        if let Some(g) = v.gamma() {
            writeln!(writer, "{}\t{}", word, g)?;
        }
    }
    Ok(())
}

/// Parse a ternary file. Any component outside {-1, 0, 1} is rejected.
pub fn read_ternary<R: BufRead>(reader: R, source: &str) -> Result<TernarySet> {
    let opts = LoadOptions {
        header: HeaderMode::Auto,
        lowercase: false,
    };
    let (set, _) = read_embeddings(reader, source, &opts)?;
    let mut vectors = Vec::with_capacity(set.len());
    for (word, v) in set.iter() {
        let codes = v
            .iter()
            .map(|&x| {
                if x == 1.0 {
                    Ok(Trit::Plus)
                } else if x == -1.0 {
                    Ok(Trit::Minus)
                } else if x == 0.0 {
                    Ok(Trit::Zero)
                } else {
                    Err(Error::Invalid(format!(
                        "{}: '{}' has non-ternary component {}",
                        source, word, x
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        vectors.push(TernaryVector::from_codes(codes));
    }
    TernarySet::new(set.words().to_vec(), vectors)
}

pub fn read_gammas<R: BufRead>(reader: R, source: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(word), Some(g), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(source, i + 1, "expected 'word<TAB>gamma'"));
        };
        let g: f64 = g
            .parse()
            .ok()
            .filter(|g: &f64| g.is_finite() && *g >= 0.0)
            .ok_or_else(|| Error::parse(source, i + 1, format!("invalid gamma '{}'", g)))?;
        out.push((word.to_owned(), g));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Trit::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(absmean_gamma(&[2.0, -1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(absmean_gamma(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(absmean_gamma(&[-3.0]).unwrap(), 3.0);
        assert!(matches!(absmean_gamma(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn quantize_examples() {
        let t = quantize(&[2.0, -1.0, 0.0]).unwrap();
        assert_eq!(t.values(), &[Plus, Zero, Zero]);
        assert_eq!(t.gamma(), Some(1.0));

        let t = quantize(&[0.0; 4]).unwrap();
        assert_eq!(t.values(), &[Zero; 4]);
        assert_eq!(t.gamma(), Some(0.0));

        let t = quantize(&[3.0, -3.0]).unwrap();
        assert_eq!(t.values(), &[Zero, Zero]);
        assert_eq!(t.gamma(), Some(3.0));

        assert!(quantize(&[]).is_err());
    }

    #[test]
    fn quantize_all_examples() {
        let zeros = EmbeddingSet::new(vec!["a".into(), "b".into()], vec![vec![0.0; 3]; 2]).unwrap();
        let q = quantize_all(&zeros);
        assert!(q.vectors().iter().all(|v| v.values() == [Zero; 3]));

        let x = EmbeddingSet::new(vec!["x".into()], vec![vec![2.0, -1.0, 0.0]]).unwrap();
        assert_eq!(quantize_all(&x).vectors()[0].values(), &[Plus, Zero, Zero]);

        let set = EmbeddingSet::new(
            vec!["p".into(), "q".into()],
            vec![vec![4.0, -0.5, -3.0, 0.1], vec![-1.0, 1.0, 5.0, -6.0]],
        )
        .unwrap();
        let pos = quantize_all(&set);
        let neg = quantize_all(&set.scaled(-1.0));
        for (a, b) in pos.vectors().iter().zip(neg.vectors()) {
            assert_eq!(&-a, b);
        }
    }

    #[test]
    fn per_matrix_and_normalized_modes() {
        let set = EmbeddingSet::new(
            vec!["small".into(), "big".into()],
            vec![vec![1.0, -1.0, 0.0], vec![10.0, 0.0, -20.0]],
        )
        .unwrap();
        let opts = QuantizeOptions {
            scope: GammaScope::PerMatrix,
            l2_normalize: false,
        };
        let q = quantize_all_with(&set, &opts);
        // gamma = 32 / 6
        assert_eq!(q.vectors()[0].values(), &[Zero, Zero, Zero]);
        assert_eq!(q.vectors()[1].values(), &[Plus, Zero, Minus]);

        let normalized = quantize_all_with(
            &set,
            &QuantizeOptions {
                scope: GammaScope::PerVector,
                l2_normalize: true,
            },
        );
        let plain = quantize_all(&set);
        for (a, b) in normalized.vectors().iter().zip(plain.vectors()) {
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn ternary_text_round_trip() {
        let set = quantize_all(
            &EmbeddingSet::new(
                vec!["a".into(), "b".into()],
                vec![vec![1.0, -2.0, 0.1], vec![0.0, 0.0, 0.0]],
            )
            .unwrap(),
        );
        let mut text = Vec::new();
        write_ternary(&set, &mut text).unwrap();
        assert_eq!(std::str::from_utf8(&text).unwrap(), "a 0 -1 0\nb 0 0 0\n");
        let mut gam = Vec::new();
        write_gammas(&set, &mut gam).unwrap();
        let back = read_ternary(text.as_slice(), "t")
            .unwrap()
            .with_gammas(&read_gammas(gam.as_slice(), "g").unwrap())
            .unwrap();
        assert_eq!(back, set);
        assert!(read_ternary("a 0 0.5\n".as_bytes(), "t").is_err());
    }

    #[test]
    fn zero_gamma_requires_zero_codes() {
        assert!(TernaryVector::new(vec![Plus], Some(0.0)).is_err());
        assert!(TernaryVector::new(vec![Zero], Some(0.0)).is_ok());
    }

    fn arb_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 1..64)
    }

    proptest! {
        #[test]
        fn sign_symmetry(v in arb_vec()) {
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let a = quantize(&v).unwrap();
            let b = quantize(&neg).unwrap();
            prop_assert_eq!(&-&a, &b);
        }

        #[test]
        fn power_of_two_scale_invariance(v in arb_vec(), e in -20i32..20) {
            let c = 2f64.powi(e);
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let (a, b) = (quantize(&v).unwrap(), quantize(&scaled).unwrap());
            prop_assert_eq!(a.values(), b.values());
        }

        #[test]
        fn output_alphabet_and_boundary(v in prop::collection::vec(-4i32..5, 1..16)) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            let t = quantize(&v).unwrap();
            let g = t.gamma().unwrap();
            prop_assert_eq!(t.composition().total(), v.len());
            for (w, q) in v.iter().zip(t.values()) {
                if w.abs() == g {
                    prop_assert_eq!(*q, Zero);
                }
            }
        }
    }
}
