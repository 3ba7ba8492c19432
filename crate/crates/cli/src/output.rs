//! CSV and JSON writers. Every file starts with the run manifest; only
//! the JSON `metadata` block carries a timestamp.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use crate::args::RunManifest;
use crate::error::CliError;

pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_with(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
        let path = self.root.join(name);
        let mut buf = Vec::new();
        fill(&mut buf).map_err(|e| CliError::io(&path, e))?;
        std::fs::write(&path, buf).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn manifest_line(manifest: &RunManifest) -> String {
    format!("# manifest: {}\n", serde_json::to_string(manifest).expect("manifest serializes"))
}

/// Manifest comment, header line, then one line per row.
pub fn csv<I, R>(manifest: &RunManifest, header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = manifest_line(manifest);
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// `{:?}` gives the shortest round-tripping decimal.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn json_doc(manifest: &RunManifest, key: &str, body: &impl Serialize) -> String {
    let generated = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut doc = serde_json::Map::new();
    doc.insert("manifest".into(), json!(manifest));
    doc.insert(key.into(), json!(body));
    doc.insert("metadata".into(), json!({ "generated_unix_s": generated }));
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("document serializes");
    s.push('\n');
    s
}
