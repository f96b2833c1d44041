// SPDX-License-Identifier: Apache-2.0

//! JSON sidecar recording everything needed to regenerate a run's CSV.

use std::path::{Path, PathBuf};

use photon_window::sweep::{Engine, SweepSpec, Tolerances};
use photon_window::ScaledParams;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub params: ScaledParams,
    pub spec: Option<SweepSpec>,
    pub engines: Vec<Engine>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub jobs: usize,
    pub artifact_version: String,
    pub timestamp: String,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

pub fn timestamp() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_else(|_| "unknown".into())
}

impl RunManifest {
    /// Writes `<stem>.manifest.json` next to the CSV at `csv`.
    pub fn write_beside(&self, csv: &Path) -> std::io::Result<PathBuf> {
        let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        let path = csv.with_file_name(format!("{stem}.manifest.json"));
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
