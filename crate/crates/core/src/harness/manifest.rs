use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one run: the full resolved configuration, timings and every
/// file written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub library_version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub stages: Vec<StageTiming>,
    pub outputs: Vec<String>,
    pub status: RunStatus,
    pub error: Option<String>,
    #[serde(skip)]
    path: PathBuf,
}

impl RunManifest {
    /// Creates the manifest and writes it in the `running` state.
    pub fn begin(out_dir: &Path, command: &str, config: &ExperimentConfig) -> Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        let manifest = Self {
            command: command.to_string(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.entries(),
            stages: Vec::new(),
            outputs: Vec::new(),
            status: RunStatus::Running,
            error: None,
            path: out_dir.join(MANIFEST_FILE),
        };
        manifest.write()?;
        Ok(manifest)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut m: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        m.path = path.to_path_buf();
        Ok(m)
    }

    fn write(&self) -> Result<()> {
        std::fs::write(&self.path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Runs `f` as a named stage and records its wall time.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        log::info!("stage {name}");
        let out = f().map_err(|e| e.in_stage(name));
        self.stages.push(StageTiming {
            stage: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn add_output(&mut self, file: &Path) {
        let name = file.file_name().map_or_else(
            || file.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        if !self.outputs.contains(&name) {
            self.outputs.push(name);
        }
    }

    /// Final write, as complete or failed with `error`.
    pub fn finish(mut self, error: Option<&Error>) -> Result<Self> {
        match error {
            None => self.status = RunStatus::Complete,
            Some(e) => {
                self.status = RunStatus::Failed;
                self.error = Some(e.to_string());
            }
        }
        self.write()?;
        Ok(self)
    }
}
