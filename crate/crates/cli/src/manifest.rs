use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use chrono::{DateTime, Utc};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DocumentTiming {
    pub document_id: String,
    pub wall_ms: f64,
}

/// Record of one CLI run: what went in, what came out, how long it took.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    /// Relative paths in `argv` and `config` resolve against this.
    pub working_dir: PathBuf,
    pub version: String,
    pub started_at: DateTime<Utc>,
    /// Input files and directories by flag name.
    pub config: BTreeMap<String, PathBuf>,
    pub seeds: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub model_checksums: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy_hash: Option<String>,
    pub documents: Vec<DocumentTiming>,
    pub outputs: Vec<PathBuf>,
    pub total_ms: f64,
    #[serde(skip)]
    clock: Option<Instant>,
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            working_dir: std::env::current_dir().unwrap_or_default(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: Utc::now(),
            config: BTreeMap::new(),
            seeds: BTreeMap::new(),
            jobs: None,
            model_checksums: BTreeMap::new(),
            policy_hash: None,
            documents: Vec::new(),
            outputs: Vec::new(),
            total_ms: 0.0,
            clock: Some(Instant::now()),
        }
    }

    pub fn input(&mut self, flag: &str, path: &Path) -> &mut Self {
        self.config.insert(flag.to_string(), path.to_path_buf());
        self
    }

    pub fn seed(&mut self, name: &str, seed: u64) -> &mut Self {
        self.seeds.insert(name.to_string(), seed);
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    /// Records and prints one document's wall-clock time.
    pub fn timed(&mut self, document_id: &str, wall_ms: f64, detail: &str) {
        println!("{document_id}\t{detail}\t{wall_ms:.1} ms");
        self.documents.push(DocumentTiming { document_id: document_id.to_string(), wall_ms });
    }

    /// Writes the manifest to `path` and returns it.
    pub fn finish(mut self, path: &Path) -> anyhow::Result<PathBuf> {
        self.total_ms = self.clock.map_or(0.0, |c| c.elapsed().as_secs_f64() * 1000.0);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path.to_path_buf())
    }
}

/// `out` with `.manifest.json` appended, beside it rather than inside it.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_else(|| "run".into());
    name.push(".manifest.json");
    out.with_file_name(name)
}
