//! File formats for rasters, spike counts and codec configuration.
//!
//! Raster JSON Lines, one record per word:
//!
//! ```text
//! {"word":"cat","window_ms":200,"trains":[[1.250,13.807],[],[4.002]]}
//! ```
//!
//! Spike times are milliseconds truncated (not rounded) to three decimals so
//! that every written time stays strictly below `window_ms`.
//!
//! Count CSV: `word,c1,c2,...,cn`, no header.
//!
//! Config text: `key = value` lines, `#` comments. Keys are `window_s`,
//! `rate_plus_hz`, `rate_minus_hz`, `rate_zero_hz` (must be 0),
//! `threshold_hz`, `mode` and `seed`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Deserialize;

use super::{CodecConfig, Mode, SpikeRaster};
use crate::error::{Error, Result};

/// Serialize one raster record, without the trailing newline.
pub fn raster_record(word: &str, raster: &SpikeRaster) -> String {
    let mut out = String::with_capacity(32 + raster.total_spikes() * 8);
    out.push_str("{\"word\":");
    out.push_str(&serde_json::to_string(word).expect("strings always serialize"));
    let _ = write!(out, ",\"window_ms\":{},\"trains\":[", raster.window_s() * 1000.0);
    // microsecond ticks; the epsilon absorbs representation error such as 0.005 * 1e6 = 4999.999...
    let last_tick = (raster.window_s() * 1e6).ceil() - 1.0;
    for (d, train) in raster.trains().iter().enumerate() {
        if d > 0 {
            out.push(',');
        }
        out.push('[');
        for (i, &t) in train.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let ms = (t * 1e6 + 1e-6).floor().min(last_tick) / 1000.0;
            let _ = write!(out, "{:.3}", ms);
        }
        out.push(']');
    }
    out.push_str("]}");
    out
}

pub fn write_rasters<'a, W, I>(mut writer: W, records: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a SpikeRaster)>,
{
    for (word, raster) in records {
        writeln!(writer, "{}", raster_record(word, raster))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct RasterRecord {
    word: String,
    window_ms: f64,
    trains: Vec<Vec<f64>>,
}

/// Parse a raster JSONL stream into `(word, raster)` pairs.
pub fn read_rasters<R: BufRead>(reader: R, source: &str) -> Result<Vec<(String, SpikeRaster)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RasterRecord = serde_json::from_str(&line).map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        let window_s = rec.window_ms / 1000.0;
        let trains = rec
            .trains
            .into_iter()
            .map(|t| t.into_iter().map(|ms| ms / 1000.0).collect())
            .collect();
        let raster =
            SpikeRaster::with_coincident(window_s, trains).map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        out.push((rec.word, raster));
    }
    Ok(out)
}

pub fn write_counts<'a, W, I>(writer: W, rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, Vec<u64>)>,
{
    let mut csv = csv::WriterBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_writer(writer);
    let to_err = |e: csv::Error| Error::Invalid(format!("writing counts: {}", e));
    for (word, counts) in rows {
        let mut record = csv::StringRecord::with_capacity(16 * counts.len(), counts.len() + 1);
        record.push_field(word);
        for c in counts {
            record.push_field(&c.to_string());
        }
        csv.write_record(&record).map_err(to_err)?;
    }
    csv.flush()
        .map_err(|e| Error::Invalid(format!("writing counts: {}", e)))?;
    Ok(())
}

/// Parse a count CSV. All rows must have the same number of counts.
pub fn read_counts<R: std::io::Read>(reader: R, source: &str) -> Result<Vec<(String, Vec<u64>)>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out: Vec<(String, Vec<u64>)> = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let lineno = i + 1;
        let rec = rec.map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        let mut fields = rec.iter();
        let word = fields
            .next()
            .filter(|w| !w.is_empty())
            .ok_or_else(|| Error::parse(source, lineno, "missing word"))?;
        let counts = fields
            .map(|f| {
                f.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::parse(source, lineno, format!("invalid count '{}'", f)))
            })
            .collect::<Result<Vec<_>>>()?;
        if counts.is_empty() {
            return Err(Error::parse(source, lineno, "row has no counts"));
        }
        if let Some((_, first)) = out.first() {
            if first.len() != counts.len() {
                return Err(Error::parse(
                    source,
                    lineno,
                    format!("expected {} counts, found {}", first.len(), counts.len()),
                ));
            }
        }
        out.push((word.to_owned(), counts));
    }
    Ok(out)
}

/// Apply `key = value` lines on top of `base`.
pub fn parse_config(text: &str, base: CodecConfig) -> Result<CodecConfig> {
    let mut cfg = base;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        let (key, value) = (key.trim(), value.trim().trim_matches('"'));
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("line {}: '{}' is not a number", i + 1, value)))
        };
        match key {
            "window_s" => cfg.window_s = num()?,
            "rate_plus_hz" => cfg.rate_plus_hz = num()?,
            "rate_minus_hz" => cfg.rate_minus_hz = num()?,
            "threshold_hz" => cfg.threshold_hz = num()?,
            "rate_zero_hz" => {
                if num()? != 0.0 {
                    return Err(Error::Config(format!("line {}: rate_zero_hz is fixed at 0", i + 1)));
                }
            }
            "mode" => cfg.mode = value.parse::<Mode>()?,
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("line {}: invalid seed '{}'", i + 1, value)))?
            }
            other => return Err(Error::Config(format!("line {}: unknown key '{}'", i + 1, other))),
        }
    }
    Ok(cfg)
}

pub fn format_config(cfg: &CodecConfig) -> String {
    format!(
        "window_s = {}\nrate_plus_hz = {}\nrate_minus_hz = {}\nrate_zero_hz = 0\nthreshold_hz = {}\nmode = {}\nseed = {}\n",
        cfg.window_s, cfg.rate_plus_hz, cfg.rate_minus_hz, cfg.threshold_hz, cfg.mode, cfg.seed
    )
}
