//! Readers and writers for the text formats consumed by the pipeline.
//!
//! * Embeddings: one `token v1 v2 ... vn` line per word, whitespace separated,
//!   optionally preceded by a `count dim` header line (word2vec text output).
//! * SimLex-style similarity data: tab-separated with a named header row that
//!   contains at least the `word1`, `word2` and `SimLex999` columns.
//! * Analogies: four tokens per line, lines starting with `:` or `#` are
//!   section labels and ignored.
//! * Word lists: one token per line.
//!
//! Every numeric field must be finite. Token matching is exact and
//! case-sensitive unless lowercase folding is requested at load time.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered vocabulary with one dense vector per word.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    words: Vec<String>,
    data: Vec<f64>,
    dim: usize,
    index: HashMap<String, usize>,
}

impl EmbeddingSet {
    /// Build a set from parallel word and vector lists.
    pub fn new(words: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if words.len() != vectors.len() {
            return Err(Error::Invalid(format!(
                "{} words but {} vectors",
                words.len(),
                vectors.len()
            )));
        }
        let dim = vectors.first().map(Vec::len).unwrap_or(0);
        let mut data = Vec::with_capacity(words.len() * dim);
        for (word, v) in words.iter().zip(&vectors) {
            if v.len() != dim {
                return Err(Error::Invalid(format!(
                    "vector for '{}' has {} dimensions, expected {}",
                    word,
                    v.len(),
                    dim
                )));
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("non-finite value {} for '{}'", x, word)));
            }
            data.extend_from_slice(v);
        }
        Self::from_flat(words, data, dim)
    }

    /// Build a set from a row-major matrix.
    pub fn from_flat(words: Vec<String>, data: Vec<f64>, dim: usize) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Empty("embedding set".into()));
        }
        if dim == 0 {
            return Err(Error::Invalid("embedding dimensionality must be at least 1".into()));
        }
        if data.len() != words.len() * dim {
            return Err(Error::Invalid(format!(
                "matrix has {} values, expected {} x {}",
                data.len(),
                words.len(),
                dim
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate token '{}'", w)));
            }
        }
        Ok(EmbeddingSet {
            words,
            data,
            dim,
            index,
        })
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

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.vector(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.words
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(w, v)| (w.as_str(), v))
    }

    /// Multiply every vector by `factor`.
    pub fn scaled(&self, factor: f64) -> EmbeddingSet {
        EmbeddingSet {
            words: self.words.clone(),
            data: self.data.iter().map(|x| x * factor).collect(),
            dim: self.dim,
            index: self.index.clone(),
        }
    }
}

/// How to treat the first line of an embedding file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HeaderMode {
    Absent,
    Present,
    /// Treat the first line as a header if it consists of exactly two
    /// unsigned integers.
    #[default]
    Auto,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    pub header: HeaderMode,
    /// Fold tokens to lowercase. Later rows that collide with an earlier
    /// token after folding are dropped and counted.
    pub lowercase: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub rows: usize,
    pub folded_duplicates: usize,
}

/// Load an embedding file.
pub fn load_embeddings(path: impl AsRef<Path>, has_header: bool) -> Result<EmbeddingSet> {
    let opts = LoadOptions {
        header: if has_header {
            HeaderMode::Present
        } else {
            HeaderMode::Absent
        },
        lowercase: false,
    };
    load_embeddings_with(path, &opts).map(|(set, _)| set)
}

pub fn load_embeddings_with(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<(EmbeddingSet, LoadStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(BufReader::new(file), &path.display().to_string(), opts)
}

pub fn read_embeddings<R: BufRead>(reader: R, source: &str, opts: &LoadOptions) -> Result<(EmbeddingSet, LoadStats)> {
    let mut words = Vec::new();
    let mut data = Vec::new();
    let mut dim: Option<usize> = None;
    let mut header: Option<(usize, usize)> = None;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut stats = LoadStats::default();
    let mut first = true;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else {
            continue;
        };

        if first {
            first = false;
            if let Some(h) = parse_header(&line, opts.header, source, lineno)? {
                header = Some(h);
                dim = Some(h.1);
                continue;
            }
        }

        stats.rows += 1;
        let start = data.len();
        for field in parts {
            let value: f64 = field
                .parse()
                .map_err(|_| Error::parse(source, lineno, format!("cannot parse '{}' as a number", field)))?;
            if !value.is_finite() {
                return Err(Error::parse(source, lineno, format!("non-finite value '{}'", field)));
            }
            data.push(value);
        }
        let n = data.len() - start;
        match dim {
            None if n == 0 => {
                return Err(Error::parse(source, lineno, "row has no vector components"));
            }
            None => dim = Some(n),
            Some(d) if d != n => {
                return Err(Error::parse(
                    source,
                    lineno,
                    format!("expected {} values, found {}", d, n),
                ));
            }
            Some(_) => {}
        }

        let token = if opts.lowercase {
            token.to_lowercase()
        } else {
            token.to_owned()
        };
        if let Some(&prev) = seen.get(&token) {
            if opts.lowercase {
                data.truncate(start);
                stats.folded_duplicates += 1;
                continue;
            }
            return Err(Error::parse(
                source,
                lineno,
                format!("duplicate token '{}' (first seen on line {})", token, prev),
            ));
        }
        seen.insert(token.clone(), lineno);
        words.push(token);
    }

    if words.is_empty() {
        return Err(Error::Empty(format!("embedding file {}", source)));
    }
    if let Some((count, _)) = header {
        if count != stats.rows {
            return Err(Error::parse(
                source,
                1,
                format!("header declares {} rows, file has {}", count, stats.rows),
            ));
        }
    }
    let dim = dim.unwrap_or(0);
    let set = EmbeddingSet::from_flat(words, data, dim)?;
    Ok((set, stats))
}

fn parse_header(line: &str, mode: HeaderMode, source: &str, lineno: usize) -> Result<Option<(usize, usize)>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let parsed = if fields.len() == 2 {
        match (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
            (Ok(c), Ok(d)) => Some((c, d)),
            _ => None,
        }
    } else {
        None
    };
    match mode {
        HeaderMode::Absent => Ok(None),
        HeaderMode::Auto => Ok(parsed.filter(|&(_, d)| d > 0)),
        HeaderMode::Present => match parsed {
            Some((_, 0)) => Err(Error::parse(source, lineno, "header declares zero dimensions")),
            Some(h) => Ok(Some(h)),
            None => Err(Error::parse(source, lineno, "expected a 'count dim' header")),
        },
    }
}

/// Write `set` in the text format. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn write_embeddings<W: Write>(set: &EmbeddingSet, mut writer: W, header: bool) -> std::io::Result<()> {
    if header {
        writeln!(writer, "{} {}", set.len(), set.dim())?;
    }
    for (word, v) in set.iter() {
        write!(writer, "{}", word)?;
        for x in v {
            write!(writer, " {}", x)?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityPair {
    pub word_a: String,
    pub word_b: String,
    pub human_score: f64,
}

pub fn load_simlex(path: impl AsRef<Path>) -> Result<Vec<SimilarityPair>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_simlex(BufReader::new(file), &path.display().to_string())
}

pub fn read_simlex<R: BufRead>(reader: R, source: &str) -> Result<Vec<SimilarityPair>> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((i, line)) => {
                let line = line.map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::Empty(format!("similarity file {}", source))),
        }
    };
    let columns: Vec<&str> = header.trim_end_matches('\r').split('\t').map(str::trim).collect();
    let column = |name: &str| {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::parse(source, 1, format!("missing required column '{}'", name)))
    };
    let (ca, cb, cs) = (column("word1")?, column("word2")?, column("SimLex999")?);
    let needed = ca.max(cb).max(cs) + 1;

    let mut pairs = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() < needed {
            return Err(Error::parse(
                source,
                lineno,
                format!("expected at least {} columns, found {}", needed, fields.len()),
            ));
        }
        let score: f64 = fields[cs]
            .parse()
            .map_err(|_| Error::parse(source, lineno, format!("cannot parse score '{}'", fields[cs])))?;
        if !score.is_finite() {
            return Err(Error::parse(source, lineno, "non-finite score"));
        }
        let (a, b) = (fields[ca], fields[cb]);
        if a.is_empty() || b.is_empty() {
            return Err(Error::parse(source, lineno, "empty word field"));
        }
        if a == b {
            return Err(Error::parse(
                source,
                lineno,
                format!("pair compares '{}' with itself", a),
            ));
        }
        pairs.push(SimilarityPair {
            word_a: a.to_owned(),
            word_b: b.to_owned(),
            human_score: score,
        });
    }
    Ok(pairs)
}

/// `a` is to `b` as `c` is to `d`; `d` is the expected answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyQuad {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
}

impl AnalogyQuad {
    pub fn words(&self) -> [&str; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn to_lowercase(&self) -> AnalogyQuad {
        AnalogyQuad {
            a: self.a.to_lowercase(),
            b: self.b.to_lowercase(),
            c: self.c.to_lowercase(),
            d: self.d.to_lowercase(),
        }
    }
}

pub fn load_analogies(path: impl AsRef<Path>) -> Result<Vec<AnalogyQuad>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_analogies(BufReader::new(file), &path.display().to_string())
}

pub fn read_analogies<R: BufRead>(reader: R, source: &str) -> Result<Vec<AnalogyQuad>> {
    let mut quads = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(':') || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 4 {
            return Err(Error::parse(
                source,
                lineno,
                format!("expected 4 tokens, found {}", tokens.len()),
            ));
        }
        quads.push(AnalogyQuad {
            a: tokens[0].to_owned(),
            b: tokens[1].to_owned(),
            c: tokens[2].to_owned(),
            d: tokens[3].to_owned(),
        });
    }
    Ok(quads)
}

/// Ordered list of unique tokens.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WordList {
    tokens: Vec<String>,
}

impl WordList {
    /// Keeps the first occurrence of every token.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = std::collections::HashSet::new();
        let tokens = tokens
            .into_iter()
            .map(Into::into)
            .filter(|t| seen.insert(t.clone()))
            .collect();
        WordList { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn to_lowercase(&self) -> WordList {
        WordList::from_tokens(self.tokens.iter().map(|t| t.to_lowercase()))
    }
}

pub fn load_wordlist(path: impl AsRef<Path>) -> Result<WordList> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_wordlist(BufReader::new(file), &path.display().to_string())
}

pub fn read_wordlist<R: BufRead>(reader: R, source: &str) -> Result<WordList> {
    let mut tokens = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        let token = line.trim();
        if !token.is_empty() {
            tokens.push(token.to_owned());
        }
    }
    if tokens.is_empty() {
        return Err(Error::Empty(format!("word list {}", source)));
    }
    Ok(WordList::from_tokens(tokens))
}

/// Keep the words of `list` that `set` knows, in list order. Also returns the
/// number of listed words missing from `set`.
pub fn restrict(set: &EmbeddingSet, list: &WordList) -> Result<(EmbeddingSet, usize)> {
    let mut words = Vec::new();
    let mut data = Vec::new();
    let mut missing = 0;
    for token in list.tokens() {
        match set.get(token) {
            Some(v) => {
                words.push(token.clone());
                data.extend_from_slice(v);
            }
            None => missing += 1,
        }
    }
    if words.is_empty() {
        return Err(Error::EmptyResult(format!(
            "none of the {} listed words are in the embedding vocabulary",
            list.len()
        )));
    }
    let set = EmbeddingSet::from_flat(words, data, set.dim())?;
    Ok((set, missing))
}
