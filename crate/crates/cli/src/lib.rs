//! Batch front end for the word2spike codec.
//!
//! Each subcommand runs one stage of the pipeline (quantize, encode, decode)
//! or a whole-pipeline job (analyze, eval) and writes its outputs plus a
//! `<command>.manifest.json` into `--out-dir`.
//!
//! Exit codes: 0 success, 2 input error, 3 empty result, 4 configuration error.

mod output;
mod svg;

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;
use word2spike::analysis::{rate_spread, suggest_threshold};
use word2spike::codec::wire::{format_config, parse_config, raster_record, read_counts, read_rasters};
use word2spike::codec::{decode_counts, encode};
use word2spike::corpus_io::{
    load_analogies, load_embeddings_with, load_simlex, load_wordlist, restrict, HeaderMode, LoadOptions,
};
use word2spike::evaluator::{full_report, Datasets, FullReport, ReportOptions, SpikeView};
use word2spike::quantizer::{
    quantize_all_with, read_ternary, write_gammas, write_ternary, GammaScope, QuantizeOptions,
};
use word2spike::{
    misclassification_probabilities, word_stream_id, CodecConfig, Composition, EmbeddingSet, Mode, TernarySet,
    TernaryVector,
};

pub use output::{RunManifest, Staging};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] word2spike::Error),
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: std::io::Error },
    #[error("writing {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn input(path: &Path, source: std::io::Error) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn output(path: &Path, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use word2spike::Error as E;
        match self {
            CliError::Core(E::EmptyResult(_) | E::Degenerate(_)) => 3,
            CliError::Core(E::Config(_) | E::WindowMismatch { .. }) | CliError::Config(_) => 4,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "word2spike", version, about = "Rate-coded spike codec for word embeddings")]
pub struct Cli {
    /// Worker threads (defaults to all cores). Outputs do not depend on it.
    #[arg(long, global = true, env = "W2S_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ternarize an embedding file.
    Quantize(QuantizeArgs),
    /// Turn embeddings or ternary codes into spike rasters.
    Encode(EncodeArgs),
    /// Recover ternary codes from rasters or spike counts.
    Decode(DecodeArgs),
    /// Exact decode error analysis for a codec configuration.
    Analyze(AnalyzeArgs),
    /// Score original, quantized and spike representations.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    #[value(name = "paper-200ms")]
    Paper200ms,
    #[value(name = "paper-400ms")]
    Paper400ms,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Stochastic,
    Lossless,
}

#[derive(Debug, Clone, Args)]
pub struct CodecArgs {
    /// Base configuration.
    #[arg(long, value_enum, env = "W2S_PRESET")]
    pub preset: Option<Preset>,
    /// Key-value config file applied on top of the preset.
    #[arg(long, env = "W2S_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, env = "W2S_MODE")]
    pub mode: Option<ModeArg>,
    /// Required in stochastic mode.
    #[arg(long, env = "W2S_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "W2S_WINDOW_MS")]
    pub window_ms: Option<f64>,
    /// Firing rate for +1, Hz.
    #[arg(long, env = "W2S_RATE_PLUS")]
    pub rate_plus: Option<f64>,
    /// Firing rate for -1, Hz.
    #[arg(long, env = "W2S_RATE_MINUS")]
    pub rate_minus: Option<f64>,
    /// Decode boundary, Hz.
    #[arg(long, env = "W2S_THRESHOLD")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EmbeddingArgs {
    #[arg(long, env = "W2S_EMBEDDINGS")]
    pub embeddings: PathBuf,
    /// Keep only these words, in list order.
    #[arg(long, env = "W2S_WORDLIST")]
    pub wordlist: Option<PathBuf>,
    /// Fold tokens (and dataset tokens) to lowercase.
    #[arg(long)]
    pub lowercase: bool,
    /// The first line is a `count dim` header.
    #[arg(long, conflicts_with = "no_header")]
    pub header: bool,
    /// The first line is data. Without either flag the header is sniffed.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Clone, Args)]
pub struct QuantizerArgs {
    /// One gamma for the whole vocabulary instead of one per word.
    #[arg(long)]
    pub per_matrix: bool,
    /// L2-normalize vectors before quantizing.
    #[arg(long)]
    pub l2_normalize: bool,
}

impl QuantizerArgs {
    fn options(&self) -> QuantizeOptions {
        QuantizeOptions {
            scope: if self.per_matrix {
                GammaScope::PerMatrix
            } else {
                GammaScope::PerVector
            },
            l2_normalize: self.l2_normalize,
        }
    }
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[command(flatten)]
    pub input: EmbeddingArgs,
    #[command(flatten)]
    pub quantizer: QuantizerArgs,
    #[arg(long, env = "W2S_OUT_DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(
        long,
        env = "W2S_EMBEDDINGS",
        conflicts_with = "ternary",
        required_unless_present = "ternary"
    )]
    pub embeddings: Option<PathBuf>,
    /// Ternary file from `quantize`.
    #[arg(long)]
    pub ternary: Option<PathBuf>,
    #[arg(long, env = "W2S_WORDLIST")]
    pub wordlist: Option<PathBuf>,
    #[arg(long)]
    pub lowercase: bool,
    #[command(flatten)]
    pub quantizer: QuantizerArgs,
    #[command(flatten)]
    pub codec: CodecArgs,
    /// Also render this word's raster as SVG.
    #[arg(long)]
    pub svg_word: Option<String>,
    #[arg(long, env = "W2S_OUT_DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Raster JSON Lines from `encode`.
    #[arg(long, conflicts_with = "counts", required_unless_present = "counts")]
    pub rasters: Option<PathBuf>,
    /// Count CSV from `encode`.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Ternary file to score the reconstruction against.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub codec: CodecArgs,
    #[arg(long, env = "W2S_OUT_DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub codec: CodecArgs,
    /// Symbol counts `PLUS,MINUS,ZERO` for the expected word error.
    #[arg(long, value_parser = parse_composition)]
    pub composition: Option<Composition>,
    #[arg(long, env = "W2S_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpikeViewArg {
    Decoded,
    Rates,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: EmbeddingArgs,
    /// SimLex-999 style TSV.
    #[arg(long, env = "W2S_SIMLEX")]
    pub simlex: Option<PathBuf>,
    /// Analogy quads.
    #[arg(long, env = "W2S_ANALOGIES")]
    pub analogies: Option<PathBuf>,
    /// Neighbor list length for overlap.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Vectors standing in for the spike representation.
    #[arg(long, value_enum, default_value = "decoded")]
    pub spike_view: SpikeViewArg,
    #[command(flatten)]
    pub quantizer: QuantizerArgs,
    #[command(flatten)]
    pub codec: CodecArgs,
    #[arg(long, env = "W2S_OUT_DIR")]
    pub out_dir: PathBuf,
}

fn parse_composition(s: &str) -> Result<Composition, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [plus, minus, zero] = parts.as_slice() else {
        return Err("expected PLUS,MINUS,ZERO".into());
    };
    let n = |x: &str| x.parse::<usize>().map_err(|_| format!("'{}' is not a count", x));
    Ok(Composition {
        plus: n(plus)?,
        minus: n(minus)?,
        zero: n(zero)?,
    })
}

/// Build the codec configuration: preset, then config file, then flags.
pub fn resolve_config(args: &CodecArgs, needs_seed: bool) -> Result<CodecConfig, CliError> {
    let mut cfg = match args.preset {
        Some(Preset::Paper400ms) => CodecConfig::paper_400ms(),
        _ => CodecConfig::paper_200ms(),
    };
    let mut seed_given = args.seed.is_some();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
        seed_given |= text
            .lines()
            .any(|l| l.split('#').next().unwrap_or("").split('=').next().unwrap_or("").trim() == "seed");
        cfg = parse_config(&text, cfg)?;
    }
    if let Some(m) = args.mode {
        cfg.mode = match m {
            ModeArg::Stochastic => Mode::Stochastic,
            ModeArg::Lossless => Mode::Lossless,
        };
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(ms) = args.window_ms {
        cfg.window_s = ms / 1000.0;
    }
    if let Some(r) = args.rate_plus {
        cfg.rate_plus_hz = r;
    }
    if let Some(r) = args.rate_minus {
        cfg.rate_minus_hz = r;
    }
    if let Some(t) = args.threshold {
        cfg.threshold_hz = t;
    }
    cfg.validate()?;
    if needs_seed && cfg.mode == Mode::Stochastic && !seed_given {
        return Err(CliError::Config(
            "stochastic mode needs an explicit --seed (or a seed in the config file)".into(),
        ));
    }
    Ok(cfg)
}

fn load_options(input: &EmbeddingArgs) -> LoadOptions {
    LoadOptions {
        header: if input.header {
            HeaderMode::Present
        } else if input.no_header {
            HeaderMode::Absent
        } else {
            HeaderMode::Auto
        },
        lowercase: input.lowercase,
    }
}

/// Load embeddings and apply the optional word list. Returns the paths read.
fn load_vocabulary(
    path: &Path,
    wordlist: Option<&Path>,
    opts: &LoadOptions,
) -> Result<(EmbeddingSet, Vec<PathBuf>), CliError> {
    let (mut set, stats) = load_embeddings_with(path, opts)?;
    if stats.folded_duplicates > 0 {
        log::warn!("{} rows dropped as lowercase duplicates", stats.folded_duplicates);
    }
    let mut inputs = vec![path.to_path_buf()];
    if let Some(wl) = wordlist {
        let mut list = load_wordlist(wl)?;
        if opts.lowercase {
            list = list.to_lowercase();
        }
        let (sub, missing) = restrict(&set, &list)?;
        if missing > 0 {
            log::info!("{} listed words are not in the embedding file", missing);
        }
        set = sub;
        inputs.push(wl.to_path_buf());
    }
    Ok((set, inputs))
}

fn digests(paths: &[PathBuf]) -> Result<Vec<output::InputDigest>, CliError> {
    paths.iter().map(|p| output::digest(p)).collect()
}

fn finish(
    mut staging: Staging,
    name: &str,
    mut manifest: RunManifest,
    threads: Option<usize>,
) -> Result<Vec<PathBuf>, CliError> {
    manifest.threads = threads;
    manifest.outputs = staging.names();
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Usage(e.to_string()))?;
    staging.write_bytes(&format!("{}.manifest.json", name), &json)?;
    staging.commit()
}

/// Run a parsed command line. `argv` is recorded in the manifest.
pub fn run(cli: &Cli, argv: Vec<String>) -> Result<Vec<PathBuf>, CliError> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.threads {
            if n == 0 {
                return Err(CliError::Config("--threads must be at least 1".into()));
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CliError::Usage(e.to_string()))?
    };
    pool.install(|| match &cli.command {
        Command::Quantize(a) => cmd_quantize(a, argv, cli.threads),
        Command::Encode(a) => cmd_encode(a, argv, cli.threads),
        Command::Decode(a) => cmd_decode(a, argv, cli.threads),
        Command::Analyze(a) => cmd_analyze(a, argv, cli.threads),
        Command::Eval(a) => cmd_eval(a, argv, cli.threads),
    })
}

pub fn cmd_quantize(a: &QuantizeArgs, argv: Vec<String>, threads: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let (set, inputs) = load_vocabulary(
        &a.input.embeddings,
        a.input.wordlist.as_deref(),
        &load_options(&a.input),
    )?;
    let ternary = quantize_all_with(&set, &a.quantizer.options());
    let mut staging = Staging::new(&a.out_dir)?;
    let t = staging.dir().join("ternary.txt");
    staging.write("ternary.txt", |w| {
        write_ternary(&ternary, w).map_err(output::io_err(&t))
    })?;
    staging.write("ternary.gamma.tsv", |w| {
        write_gammas(&ternary, w).map_err(output::io_err(&t))
    })?;
    let manifest = RunManifest::new(argv, None, digests(&inputs)?);
    finish(staging, "quantize", manifest, threads)
}

const ENCODE_CHUNK: usize = 512;

pub fn cmd_encode(a: &EncodeArgs, argv: Vec<String>, threads: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(&a.codec, true)?;
    let (ternary, inputs) = match (&a.embeddings, &a.ternary) {
        (Some(path), _) => {
            let opts = LoadOptions {
                header: HeaderMode::Auto,
                lowercase: a.lowercase,
            };
            let (set, inputs) = load_vocabulary(path, a.wordlist.as_deref(), &opts)?;
            (quantize_all_with(&set, &a.quantizer.options()), inputs)
        }
        (None, Some(path)) => {
            let file = File::open(path).map_err(|e| CliError::input(path, e))?;
            let mut set = read_ternary(BufReader::new(file), &path.display().to_string())?;
            let mut inputs = vec![path.clone()];
            if let Some(wl) = &a.wordlist {
                set = restrict_ternary(set, &load_wordlist(wl)?)?;
                inputs.push(wl.clone());
            }
            (set, inputs)
        }
        (None, None) => return Err(CliError::Usage("one of --embeddings or --ternary is required".into())),
    };

    let mut staging = Staging::new(&a.out_dir)?;
    let rasters_path = staging.dir().join("rasters.jsonl");
    let words = ternary.words();
    let vectors = ternary.vectors();

    // Records are produced in parallel per chunk and written in vocabulary order.
    let mut all_counts: Vec<Vec<u64>> = Vec::with_capacity(words.len());
    staging.write("rasters.jsonl", |w| {
        for start in (0..words.len()).step_by(ENCODE_CHUNK) {
            let end = (start + ENCODE_CHUNK).min(words.len());
            let chunk: Vec<(String, Vec<u64>)> = (start..end)
                .into_par_iter()
                .map(|i| {
                    let raster = encode(&vectors[i], &cfg, word_stream_id(&words[i]));
                    (raster_record(&words[i], &raster), raster.counts())
                })
                .collect();
            for (line, counts) in chunk {
                writeln!(w, "{}", line).map_err(output::io_err(&rasters_path))?;
                all_counts.push(counts);
            }
        }
        Ok(())
    })?;
    staging.write("counts.csv", |w| {
        word2spike::codec::wire::write_counts(w, words.iter().map(String::as_str).zip(all_counts.iter().cloned()))
            .map_err(CliError::from)
    })?;
    if let Some(word) = &a.svg_word {
        let i = ternary
            .words()
            .iter()
            .position(|w| w == word)
            .ok_or_else(|| word2spike::Error::OutOfVocabulary(word.clone()))?;
        let raster = encode(&vectors[i], &cfg, word_stream_id(word));
        let svg = svg::render_raster(word, &raster);
        staging.write_bytes(&format!("raster-{}.svg", sanitize(word)), svg.as_bytes())?;
    }
    let manifest = RunManifest::new(argv, Some(cfg), digests(&inputs)?);
    finish(staging, "encode", manifest, threads)
}

fn sanitize(word: &str) -> String {
    word.chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn restrict_ternary(set: TernarySet, list: &word2spike::WordList) -> Result<TernarySet, CliError> {
    let index: std::collections::HashMap<&str, usize> =
        set.words().iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let keep: Vec<usize> = list
        .tokens()
        .iter()
        .filter_map(|t| index.get(t.as_str()).copied())
        .collect();
    if keep.is_empty() {
        return Err(word2spike::Error::EmptyResult("no listed word is in the ternary file".into()).into());
    }
    let words = keep.iter().map(|&i| set.words()[i].clone()).collect();
    let vectors = keep.iter().map(|&i| set.vectors()[i].clone()).collect();
    Ok(TernarySet::new(words, vectors)?)
}

pub fn cmd_decode(a: &DecodeArgs, argv: Vec<String>, threads: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(&a.codec, false)?;
    let (words, vectors, input): (Vec<String>, Vec<TernaryVector>, PathBuf) = match (&a.rasters, &a.counts) {
        (Some(path), _) => {
            let file = File::open(path).map_err(|e| CliError::input(path, e))?;
            let records = read_rasters(BufReader::new(file), &path.display().to_string())?;
            let vectors = records
                .par_iter()
                .map(|(_, r)| word2spike::decode(r, &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            (records.into_iter().map(|(w, _)| w).collect(), vectors, path.clone())
        }
        (None, Some(path)) => {
            let file = File::open(path).map_err(|e| CliError::input(path, e))?;
            let rows = read_counts(BufReader::new(file), &path.display().to_string())?;
            let vectors = rows.iter().map(|(_, c)| decode_counts(c, &cfg)).collect();
            (rows.into_iter().map(|(w, _)| w).collect(), vectors, path.clone())
        }
        (None, None) => return Err(CliError::Usage("one of --rasters or --counts is required".into())),
    };
    if words.is_empty() {
        return Err(word2spike::Error::EmptyResult(format!("{} has no records", input.display())).into());
    }
    let decoded = TernarySet::new(words, vectors)?;
    let mut inputs = vec![input];

    let mut staging = Staging::new(&a.out_dir)?;
    let out = staging.dir().join("decoded.txt");
    staging.write("decoded.txt", |w| {
        write_ternary(&decoded, w).map_err(output::io_err(&out))
    })?;
    if let Some(reference) = &a.reference {
        let file = File::open(reference).map_err(|e| CliError::input(reference, e))?;
        let expected = read_ternary(BufReader::new(file), &reference.display().to_string())?;
        let rec = word2spike::evaluator::reconstruction_accuracy(&expected, &decoded)?;
        println!(
            "reconstruction: {:.2}% of words exact, {:.4}% of dimensions",
            100.0 * rec.word_exact,
            100.0 * rec.per_dimension
        );
        let json = serde_json::to_vec_pretty(&rec).map_err(|e| CliError::Usage(e.to_string()))?;
        staging.write_bytes("reconstruction.json", &json)?;
        inputs.push(reference.clone());
    }
    let manifest = RunManifest::new(argv, Some(cfg), digests(&inputs)?);
    finish(staging, "decode", manifest, threads)
}

#[derive(serde::Serialize)]
struct AnalysisReport {
    config: CodecConfig,
    config_text: String,
    spreads: Vec<word2spike::analysis::LevelSpread>,
    errors: word2spike::ErrorAnalysis,
    total_error: f64,
    suggested_threshold: word2spike::analysis::ThresholdSuggestion,
    composition: Option<Composition>,
    expected_word_error: Option<f64>,
}

pub fn render_analysis(cfg: &CodecConfig, composition: Option<Composition>) -> Result<(String, String), CliError> {
    let cfg = cfg.with_mode(Mode::Stochastic);
    let errors = misclassification_probabilities(&cfg)?;
    let spreads = rate_spread(&cfg);
    let suggestion = suggest_threshold(&cfg)?;
    let word_error = composition.map(|c| errors.expected_word_error(&c));

    let mut text = String::new();
    text.push_str(&format!(
        "window {} ms, +1 at {} Hz, -1 at {} Hz, boundary {} Hz ({} spikes)\n\n",
        cfg.window_s * 1000.0,
        cfg.rate_plus_hz,
        cfg.rate_minus_hz,
        cfg.threshold_hz,
        errors.count_threshold
    ));
    text.push_str("rate spread (mean +/- sd of the estimated rate):\n");
    for s in &spreads {
        text.push_str(&format!(
            "  {:+}: {:.2} +/- {:.2} Hz  ({:.2} +/- {:.2} spikes)\n",
            s.level.value(),
            s.mean_hz,
            s.sd_hz,
            s.mean_count,
            s.sd_count
        ));
    }
    text.push_str("\nexact per-dimension decode errors:\n");
    text.push_str(&format!("  P(-1 -> +1) = {:.6e}\n", errors.p_minus_as_plus));
    text.push_str(&format!("  P(-1 ->  0) = {:.6e}\n", errors.p_minus_as_zero));
    text.push_str(&format!("  P(+1 -> -1) = {:.6e}\n", errors.p_plus_as_minus));
    text.push_str(&format!("  P(+1 ->  0) = {:.6e}\n", errors.p_plus_as_zero));
    text.push_str(&format!("  total       = {:.6e}\n", errors.total_error()));
    text.push_str(&format!(
        "\nsuggested boundary: {} Hz ({} spikes), sign-flip error sum {:.6e}\n",
        suggestion.threshold_hz, suggestion.count_threshold, suggestion.error_sum
    ));
    if let (Some(c), Some(e)) = (composition, word_error) {
        text.push_str(&format!(
            "expected word error for {} x +1, {} x -1, {} x 0: {:.6e}\n",
            c.plus, c.minus, c.zero, e
        ));
    }

    let report = AnalysisReport {
        config: cfg,
        config_text: format_config(&cfg),
        spreads,
        errors,
        total_error: errors.total_error(),
        suggested_threshold: suggestion,
        composition,
        expected_word_error: word_error,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((text, json))
}

pub fn cmd_analyze(a: &AnalyzeArgs, argv: Vec<String>, threads: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(&a.codec, false)?;
    let (text, json) = render_analysis(&cfg, a.composition)?;
    print!("{}", text);
    match &a.out_dir {
        Some(dir) => {
            let mut staging = Staging::new(dir)?;
            staging.write_bytes("analysis.json", json.as_bytes())?;
            staging.write_bytes("analysis.txt", text.as_bytes())?;
            let inputs = a.codec.config.iter().cloned().collect::<Vec<_>>();
            let manifest = RunManifest::new(argv, Some(cfg), digests(&inputs)?);
            finish(staging, "analyze", manifest, threads)
        }
        None => Ok(Vec::new()),
    }
}

pub fn cmd_eval(a: &EvalArgs, argv: Vec<String>, threads: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(&a.codec, true)?;
    let opts = load_options(&a.input);
    let (set, mut inputs) = load_vocabulary(&a.input.embeddings, a.input.wordlist.as_deref(), &opts)?;

    let mut data = Datasets::default();
    if let Some(p) = &a.simlex {
        let mut pairs = load_simlex(p)?;
        if opts.lowercase {
            for pair in &mut pairs {
                pair.word_a = pair.word_a.to_lowercase();
                pair.word_b = pair.word_b.to_lowercase();
            }
        }
        data.simlex = Some(pairs);
        inputs.push(p.clone());
    }
    if let Some(p) = &a.analogies {
        let mut quads = load_analogies(p)?;
        if opts.lowercase {
            quads = quads.iter().map(|q| q.to_lowercase()).collect();
        }
        data.analogies = Some(quads);
        inputs.push(p.clone());
    }
    let report_opts = ReportOptions {
        k: a.k,
        quantize: a.quantizer.options(),
        spike_view: match a.spike_view {
            SpikeViewArg::Decoded => SpikeView::Decoded,
            SpikeViewArg::Rates => SpikeView::EstimatedRates,
        },
    };
    let report = full_report(&set, &cfg, &data, &report_opts)?;
    let table = report.render_table();
    print!("{}", table);

    let mut staging = Staging::new(&a.out_dir)?;
    let json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?;
    staging.write_bytes("report.json", &json)?;
    staging.write_bytes("report.txt", table.as_bytes())?;
    let overlap_path = staging.dir().join("overlap.csv");
    staging.write("overlap.csv", |w| {
        write_overlap_csv(&report, w).map_err(output::io_err(&overlap_path))
    })?;
    if data.analogies.is_some() {
        let p = staging.dir().join("analogies.csv");
        staging.write("analogies.csv", |w| {
            write_analogy_csv(&report, w).map_err(output::io_err(&p))
        })?;
    }
    let manifest = RunManifest::new(argv, Some(cfg), digests(&inputs)?);
    finish(staging, "eval", manifest, threads)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn write_overlap_csv(report: &FullReport, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "word,quantized,spike")?;
    let lookup = |r: &word2spike::EvalReport| -> std::collections::HashMap<String, f64> {
        r.overlap_at_k
            .as_ref()
            .map(|o| o.per_word.iter().cloned().collect())
            .unwrap_or_default()
    };
    let (q, s) = (lookup(&report.quantized), lookup(&report.spike));
    let words = report
        .quantized
        .overlap_at_k
        .as_ref()
        .map(|o| o.per_word.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>())
        .unwrap_or_default();
    let cell = |v: Option<&f64>| v.map(|x| format!("{}", x)).unwrap_or_default();
    for word in words {
        writeln!(w, "{},{},{}", csv_field(&word), cell(q.get(&word)), cell(s.get(&word)))?;
    }
    Ok(())
}

fn write_analogy_csv(report: &FullReport, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        w,
        "a,b,c,d,skipped,original_pred,original_ok,quantized_pred,quantized_ok,spike_pred,spike_ok"
    )?;
    let [o, q, s] = &report.analogy_outcomes;
    for ((oo, qq), ss) in o.iter().zip(q).zip(s) {
        let quad = &oo.quad;
        write!(
            w,
            "{},{},{},{},{}",
            csv_field(&quad.a),
            csv_field(&quad.b),
            csv_field(&quad.c),
            csv_field(&quad.d),
            oo.skipped
        )?;
        for out in [oo, qq, ss] {
            write!(
                w,
                ",{},{}",
                csv_field(out.predicted.as_deref().unwrap_or("")),
                out.correct
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}
