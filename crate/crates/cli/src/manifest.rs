use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one run: enough to repeat it and to find what it produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    /// Fully resolved settings, defaults included.
    pub config: Value,
    pub seeds: Value,
    /// Files written by the run, in write order.
    pub outputs: Vec<PathBuf>,
    pub metrics: Value,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            argv: argv.to_vec(),
            config: Value::Null,
            seeds: Value::Null,
            outputs: Vec::new(),
            metrics: Value::Null,
        }
    }
}

/// JSON number, or a string for the infinite SNR/PSNR sentinels that JSON
/// numbers cannot carry.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else if v.is_nan() {
        Value::String("nan".into())
    } else if v > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map(num).unwrap_or(Value::Null)
}

/// Output directory that remembers every file written into it.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::writing(dir, e))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Record a file written by other means.
    pub fn record(&mut self, path: PathBuf) {
        if !self.written.contains(&path) {
            self.written.push(path);
        }
    }

    pub fn write_with<F>(&mut self, name: &str, f: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut BufWriter<File>) -> chaofdm::Result<()>,
    {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::writing(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).map_err(|e| CliError::writing(&path, e))?;
        w.flush().map_err(|e| CliError::writing(&path, e))?;
        self.record(path.clone());
        Ok(path)
    }

    /// Write `manifest.json` listing everything recorded so far.
    pub fn finish(self, mut manifest: RunManifest) -> CliResult<PathBuf> {
        manifest.outputs = self.written;
        let path = self.dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Internal(format!("cannot encode manifest: {e}")))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::writing(&path, e))?;
        Ok(path)
    }
}
