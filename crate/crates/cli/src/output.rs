use crate::error::CliError;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use tempfile::NamedTempFile;

/// Outputs written to temporary files beside their targets and renamed into place
/// together by [`Staged::commit`]. Dropping without committing removes them.
#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut tmp = NamedTempFile::new_in(&dir).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.flush().map_err(io)?;
        self.files.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub fn commit(self) -> Result<(), CliError> {
        for (tmp, path) in self.files {
            tmp.persist(&path)
                .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
        }
        Ok(())
    }
}

/// `out.asc` -> `out.<ext>`; keeps the name when it has no extension.
pub fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

pub fn manifest_path(path: &Path) -> PathBuf {
    sibling(path, "manifest.json")
}

/// Enough to reproduce a run: the command, its inputs and every effective setting.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_s: f64,
}

pub struct ManifestBuilder {
    command: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    config: BTreeMap<String, String>,
    seed: Option<u64>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            config: BTreeMap::new(),
            seed: None,
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, p: &Path) -> &mut Self {
        self.inputs.push(p.to_path_buf());
        self
    }

    pub fn output(&mut self, p: &Path) -> &mut Self {
        self.outputs.push(p.to_path_buf());
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self
    }

    pub fn finish(&self) -> RunManifest {
        RunManifest {
            command: self.command.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            config: self.config.clone(),
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        }
    }

    /// Stages the manifest JSON at `path`.
    pub fn stage(&self, staged: &mut Staged, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(&self.finish())
            .map_err(|e| CliError::Processing(format!("manifest: {e}")))?;
        staged.add(path, format!("{json}\n").as_bytes())
    }
}
