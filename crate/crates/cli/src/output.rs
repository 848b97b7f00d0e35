//! Staged output files and run manifests.
//!
//! Outputs are written to temporary files inside the output directory and
//! only renamed into place by [`Staging::commit`], so a failing command leaves
//! no partial files behind.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;
use word2spike::CodecConfig;

use crate::CliError;

pub struct Staging {
    dir: PathBuf,
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staging {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
        Ok(Staging {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Stage `name` and fill it through `fill`.
    pub fn write<F>(&mut self, name: &str, fill: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let target = self.dir.join(name);
        let tmp = NamedTempFile::new_in(&self.dir).map_err(|e| CliError::output(&target, e))?;
        {
            let mut w = BufWriter::new(tmp.as_file());
            fill(&mut w)?;
            w.flush().map_err(|e| CliError::output(&target, e))?;
        }
        self.files.push((tmp, target.clone()));
        Ok(target)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.dir.join(name);
        self.write(name, |w| w.write_all(bytes).map_err(|e| CliError::output(&target, e)))
    }

    pub fn names(&self) -> Vec<String> {
        self.files
            .iter()
            .filter_map(|(_, p)| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }

    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut out = Vec::with_capacity(self.files.len());
        for (tmp, target) in self.files {
            tmp.persist(&target).map_err(|e| CliError::output(&target, e.error))?;
            out.push(target);
        }
        Ok(out)
    }
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn digest(path: &Path) -> Result<InputDigest, CliError> {
    let mut file = File::open(path).map_err(|e| CliError::input(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| CliError::input(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(hasher.finalize()),
    })
}

/// Everything needed to reproduce a command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub config: Option<CodecConfig>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: Vec<String>, config: Option<CodecConfig>, inputs: Vec<InputDigest>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: config.map(|c| c.seed),
            config,
            threads: None,
            inputs,
            outputs: Vec::new(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

pub fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::output(path, e)
}
