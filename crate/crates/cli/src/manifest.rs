use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::formats::{to_json_text, write_text};

/// Provenance written next to every command's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Wall-clock seconds; the only field that varies between identical runs.
    pub duration_secs: f64,
}

pub struct ManifestBuilder {
    command: &'static str,
    parameters: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn start(command: &'static str, parameters: impl Serialize, seed: Option<u64>) -> Self {
        Self {
            command,
            parameters: serde_json::to_value(parameters).expect("serializable parameters"),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn finish(self, path: &Path) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            command: self.command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            parameters: self.parameters,
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            duration_secs: self.started.elapsed().as_secs_f64(),
        };
        write_text(path, &to_json_text(&manifest))?;
        Ok(manifest)
    }
}

/// `<out>.manifest.json` beside a single-file output.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
