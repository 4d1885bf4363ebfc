//! Run manifest written before any computation starts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_path: Option<String>,
    pub base_seed: u64,
    /// Seconds since the Unix epoch; the only nondeterministic field of a run.
    pub created_unix: u64,
    /// Output files, relative to the output directory.
    pub artifacts: Vec<String>,
    /// Values derived from the config before the run (norms, profiles, grids).
    pub resolved: toml::Table,
    /// The effective config; passing this file back as `--config` reruns it.
    pub config: Config,
}

impl RunManifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.toml")
    }
}

/// Collects what the manifest needs and writes it once the command knows
/// its artifacts.
pub struct ManifestWriter<'a> {
    pub command: &'static str,
    pub config_path: Option<&'a Path>,
    pub config: &'a Config,
    pub out: &'a Path,
}

impl ManifestWriter<'_> {
    pub fn write(&self, artifacts: &[&str], resolved: toml::Table) -> Result<PathBuf, CliError> {
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.to_string(),
            config_path: self.config_path.map(|p| p.display().to_string()),
            base_seed: self.config.run.seed,
            created_unix,
            artifacts: artifacts.iter().map(|s| s.to_string()).collect(),
            resolved,
            config: self.config.clone(),
        };
        let text = toml::to_string(&manifest).map_err(|e| CliError::Run(format!("manifest: {e}")))?;
        let path = self.out.join(RunManifest::file_name(self.command));
        fs::write(&path, text).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}
