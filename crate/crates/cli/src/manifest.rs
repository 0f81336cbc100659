//! Run manifests: the resolved configuration of every run, serialized
//! alongside its result files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::write_json;
use crate::CliResult;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub artifact_version: String,
    pub master_seed: u64,
    /// Fully resolved flag values of the run.
    pub config: serde_json::Value,
    /// Group labels in first-appearance order, when the run ingested
    /// labeled data.
    pub group_labels: Option<Vec<String>>,
    pub output_files: Vec<String>,
}

impl RunManifest {
    pub fn new<C: Serialize>(
        subcommand: &str,
        seed: u64,
        config: &C,
        group_labels: Option<Vec<String>>,
        output_files: Vec<String>,
    ) -> CliResult<Self> {
        let config = serde_json::to_value(config)
            .map_err(|e| crate::CliError::validation(format!("config serialization: {e}")))?;
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: seed,
            config,
            group_labels,
            output_files,
        })
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    /// Write `manifest.json` into the output directory.
    pub fn write(&self, out_dir: &Path) -> CliResult<()> {
        write_json(&out_dir.join("manifest.json"), &self.to_value())
    }
}
