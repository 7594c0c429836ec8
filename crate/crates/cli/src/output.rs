//! CSV/JSON writers and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Header plus rows, comma separated, newline terminated.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, label: Option<&str>, values: &[f64]) {
        let mut first = true;
        if let Some(l) = label {
            self.text.push_str(l);
            first = false;
        }
        for v in values {
            if !first {
                self.text.push(',');
            }
            let _ = write!(self.text, "{}", fmt_f64(*v));
            first = false;
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub parameters: serde_json::Value,
    pub outputs: Vec<OutputRecord>,
    pub wall_time_s: f64,
}

/// Collects the files of one run; stdout is used when no path is given.
pub struct Sink {
    out: Option<PathBuf>,
    written: Vec<OutputRecord>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Self {
        Self { out, written: Vec::new() }
    }

    /// Writes the main artifact to `--out`, or to stdout.
    pub fn emit(&mut self, content: &str) -> Result<(), CliError> {
        match self.out.clone() {
            Some(p) => self.write_file(&p, content),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(content.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| CliError::Io(format!("stdout: {e}")))
            }
        }
    }

    /// Writes a companion file next to `--out` (`<out>.<suffix>`), or to
    /// stderr when there is no output path.
    pub fn emit_sidecar(&mut self, suffix: &str, content: &str) -> Result<(), CliError> {
        match &self.out {
            Some(p) => {
                let path = sidecar(p, suffix);
                self.write_file(&path, content)
            }
            None => {
                eprint!("{content}");
                Ok(())
            }
        }
    }

    fn write_file(&mut self, path: &Path, content: &str) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
        fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(OutputRecord {
            path: path.display().to_string(),
            bytes: content.len(),
            sha256: hex::encode(Sha256::digest(content.as_bytes())),
        });
        Ok(())
    }

    /// Writes `<out>.manifest.json` when an output path was given.
    pub fn finish(
        self,
        subcommand: &str,
        parameters: serde_json::Value,
        elapsed: Duration,
    ) -> Result<(), CliError> {
        let Some(out) = self.out else {
            return Ok(());
        };
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            parameters,
            outputs: self.written,
            wall_time_s: elapsed.as_secs_f64(),
        };
        let path = sidecar(&out, "manifest.json");
        fs::write(&path, to_json(&manifest)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}
