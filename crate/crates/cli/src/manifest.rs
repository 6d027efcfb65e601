// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run manifests and the JSON documents that embed them.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use kdwbs::metrics::EvalResult;
use kdwbs::pipeline::DetectConfig;
use kdwbs::selector::Selection;
use kdwbs::simulator::ScenarioTruth;
use kdwbs::ChangePointSet;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::SCHEMA_VERSION;

/// Everything needed to rerun a command, plus provenance and timing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<DetectConfig>,
    /// Bandwidth actually used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buffer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub used_gram: Option<bool>,
    pub threads: usize,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input: None,
            config: None,
            bandwidth: None,
            buffer: None,
            used_gram: None,
            threads: rayon::current_num_threads(),
            wall_time_s: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub b: usize,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectOutput {
    pub schema: u32,
    pub change_points: ChangePointSet,
    pub path: Vec<PathEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<Selection>,
    pub manifest: RunManifest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthOutput {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(flatten)]
    pub truth: ScenarioTruth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluateOutput {
    pub schema: u32,
    #[serde(flatten)]
    pub result: EvalResult,
    pub manifest: RunManifest,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// Only the estimate is needed to score a result file.
#[derive(Debug, Deserialize)]
pub struct ResultChangePoints {
    pub change_points: ChangePointSet,
}

/// Accepts a bare manifest or any document with a `manifest` field.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ManifestDoc {
    Wrapped { manifest: RunManifest },
    Bare(RunManifest),
}

pub fn load_manifest(path: &Path) -> anyhow::Result<RunManifest> {
    let doc: ManifestDoc = read_json(path)?;
    Ok(match doc {
        ManifestDoc::Wrapped { manifest } => manifest,
        ManifestDoc::Bare(m) => m,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Pretty JSON with a trailing newline, to a file or standard output.
pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
