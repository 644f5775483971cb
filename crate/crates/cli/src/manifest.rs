//! Reproducibility manifest: configuration, seeds, and output checksums.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{hex_string, RunConfig};
use crate::error::{StageError, StageResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PARTIAL_MARKER: &str = ".partial";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub files: Vec<FileRecord>,
}

/// Everything needed to reproduce a run byte-for-byte: the full effective
/// configuration, its hash, the seeds, and a checksum per deterministic
/// output file. Timing files are excluded; they vary run to run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: String,
    pub status: String,
    pub config_hash: String,
    pub split_seed: u64,
    pub synthetic_seed: u64,
    /// Reminder that amplitude bases are evaluated on time normalized to
    /// [0, 1]; coefficients are comparable only across runs sharing this.
    pub time_normalization: String,
    pub config: RunConfig,
    pub stages: Vec<StageRecord>,
}

impl Manifest {
    pub fn new(config: &RunConfig) -> Self {
        Manifest {
            format_version: 1,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            status: "running".into(),
            config_hash: config.hash(),
            split_seed: config.split.seed,
            synthetic_seed: config.synthetic.seed,
            time_normalization: "amplitude basis on t normalized to [0,1]".into(),
            config: config.clone(),
            stages: Vec::new(),
        }
    }

    pub fn add_stage(&mut self, stage: &str, files: &[PathBuf], root: &Path) -> StageResult<()> {
        let mut records = Vec::with_capacity(files.len());
        for file in files {
            let rel = file
                .strip_prefix(root)
                .unwrap_or(file)
                .display()
                .to_string();
            records.push(FileRecord {
                path: rel,
                sha256: sha256_file(file)?,
            });
        }
        self.stages.push(StageRecord {
            stage: stage.into(),
            files: records,
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> StageResult<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| StageError::internal(format!("manifest serialization: {e}")))?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn sha256_file(path: &Path) -> StageResult<String> {
    let bytes = fs::read(path)
        .map_err(|e| StageError::data(format!("checksum {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex_string(&hasher.finalize()))
}

pub fn write_partial_marker(dir: &Path, config_hash: &str) -> StageResult<()> {
    fs::write(
        dir.join(PARTIAL_MARKER),
        format!("run in progress\nconfig {config_hash}\n"),
    )?;
    Ok(())
}

pub fn clear_partial_marker(dir: &Path) -> StageResult<()> {
    let marker = dir.join(PARTIAL_MARKER);
    if marker.exists() {
        fs::remove_file(marker)?;
    }
    Ok(())
}
