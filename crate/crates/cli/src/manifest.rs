use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn hash_file(path: &Path) -> Result<FileRecord> {
    let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileRecord {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&data)),
        bytes: data.len() as u64,
    })
}

/// Collects what one command read and wrote; written once as
/// `<out>/manifest.json`.
pub struct Run {
    command: &'static str,
    started: Instant,
    config: Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    wall_times: serde_json::Map<String, Value>,
    status: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    status: &'a str,
    config: &'a Value,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
    wall_times: &'a serde_json::Map<String, Value>,
}

impl Run {
    pub fn new(command: &'static str, config: &impl Serialize) -> Result<Self> {
        Ok(Run {
            command,
            started: Instant::now(),
            config: serde_json::to_value(config)?,
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_times: serde_json::Map::new(),
            status: "ok",
        })
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn time(&mut self, key: &str, secs: Option<f64>) {
        self.wall_times.insert(key.into(), secs.map_or(Value::Null, Value::from));
    }

    pub fn fail_verification(&mut self) {
        self.status = "verification_failed";
    }

    pub fn finish(mut self, out_dir: &Path) -> Result<PathBuf> {
        let total = self.started.elapsed().as_secs_f64();
        self.wall_times.insert("total_secs".into(), total.into());
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            status: self.status,
            config: &self.config,
            inputs: self.inputs.iter().map(|p| hash_file(p)).collect::<Result<_>>()?,
            outputs: self.outputs.iter().map(|p| hash_file(p)).collect::<Result<_>>()?,
            wall_times: &self.wall_times,
        };
        let path = out_dir.join("manifest.json");
        fs::write(&path, serde_json::to_vec_pretty(&manifest)?)?;
        Ok(path)
    }
}
