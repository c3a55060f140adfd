//! Guarded output files and their sidecar manifests.

use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name: OsString = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Output paths of one run, checked up front so that no work is done
/// when a write would be refused.
#[derive(Debug)]
pub struct Outputs {
    paths: Vec<PathBuf>,
    force: bool,
}

impl Outputs {
    pub fn new(force: bool) -> Self {
        Self {
            paths: Vec::new(),
            force,
        }
    }

    /// Registers `out` and its manifest.
    pub fn declare(&mut self, out: &Path) -> Result<(), CliError> {
        for p in [out.to_path_buf(), manifest_path(out)] {
            if self.paths.contains(&p) {
                return Err(CliError::Invalid(format!("{} is given twice", p.display())));
            }
            if p.is_dir() {
                return Err(CliError::Invalid(format!("{} is a directory", p.display())));
            }
            if p.exists() && !self.force {
                return Err(CliError::OutputExists(p));
            }
            let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
            if let Some(dir) = parent {
                if !dir.is_dir() {
                    return Err(CliError::io(
                        &p,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory does not exist"),
                    ));
                }
            }
            self.paths.push(p);
        }
        Ok(())
    }

    pub fn create(&self, path: &Path) -> Result<BufWriter<File>, CliError> {
        debug_assert!(self.paths.iter().any(|p| p == path), "undeclared output");
        let mut opts = OpenOptions::new();
        opts.write(true);
        if self.force {
            opts.create(true).truncate(true);
        } else {
            opts.create_new(true);
        }
        opts.open(path)
            .map(BufWriter::new)
            .map_err(|e| CliError::io(path, e))
    }

    pub fn write_all(&self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        let mut w = self.create(path)?;
        w.write_all(bytes)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(path, e))
    }

    pub fn write_json<T: Serialize>(&self, path: &Path, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serialisable");
        text.push('\n');
        self.write_all(path, text.as_bytes())
    }

    pub fn write_manifest(&self, out: &Path, manifest: &Manifest) -> Result<(), CliError> {
        self.write_json(&manifest_path(out), manifest)
    }
}

/// Sidecar describing how an output file was produced.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub inputs: Vec<String>,
    pub output: String,
    pub details: Value,
}

impl Manifest {
    pub fn new(command: &'static str, inputs: &[&Path], output: &Path, details: Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            output: output.display().to_string(),
            details,
        }
    }
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
