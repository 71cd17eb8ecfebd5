//! Artifact files. Every file carries the config hash and seed: JSON files
//! under a `meta` key, JSONL files as a first `{"meta": ...}` line, CSV and
//! SPARQL files as a leading `#` comment.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::DataError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub config_hash: String,
    pub seed: u64,
    pub stage: String,
}

impl Meta {
    pub fn comment(&self) -> String {
        format!("# config_hash={} seed={} stage={}\n", self.config_hash, self.seed, self.stage)
    }
}

pub struct Artifacts {
    root: PathBuf,
}

impl Artifacts {
    pub fn new(root: PathBuf) -> Self {
        Artifacts { root }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Path of an upstream artifact, failing with a hint naming the stage
    /// that produces it.
    pub fn upstream(&self, rel: &str, stage: &str) -> Result<PathBuf> {
        let p = self.path(rel);
        if p.is_file() {
            Ok(p)
        } else {
            Err(DataError(format!(
                "missing {}; run `geotemplate {stage}` first",
                p.display()
            ))
            .into())
        }
    }

    fn create(&self, rel: &str) -> Result<(PathBuf, fs::File)> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
        let f = fs::File::create(&p).with_context(|| format!("cannot write {}", p.display()))?;
        Ok((p, f))
    }

    pub fn write_text(&self, rel: &str, text: &str) -> Result<PathBuf> {
        let (p, mut f) = self.create(rel)?;
        f.write_all(text.as_bytes())?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, meta: &Meta, key: &str, value: &T) -> Result<PathBuf> {
        let mut obj = serde_json::Map::new();
        obj.insert("meta".into(), serde_json::to_value(meta)?);
        obj.insert(key.into(), serde_json::to_value(value)?);
        let mut text = serde_json::to_string_pretty(&Value::Object(obj))?;
        text.push('\n');
        self.write_text(rel, &text)
    }

    pub fn write_jsonl<T: Serialize>(&self, rel: &str, meta: &Meta, rows: &[T]) -> Result<PathBuf> {
        let mut text = serde_json::to_string(&serde_json::json!({ "meta": meta }))?;
        text.push('\n');
        for r in rows {
            text.push_str(&serde_json::to_string(r)?);
            text.push('\n');
        }
        self.write_text(rel, &text)
    }

    /// Writes `body` (a CSV document) after the meta comment line.
    pub fn write_csv(&self, rel: &str, meta: &Meta, body: Vec<u8>) -> Result<PathBuf> {
        let mut text = meta.comment();
        text.push_str(&String::from_utf8(body)?);
        self.write_text(rel, &text)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path, key: &str) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| DataError(format!("{}: {e}", path.display())))?;
    let inner = v
        .get_mut(key)
        .map(Value::take)
        .ok_or_else(|| DataError(format!("{}: no `{key}` entry", path.display())))?;
    serde_json::from_value(inner).map_err(|e| DataError(format!("{}: {e}", path.display())).into())
}

/// Reads a JSONL artifact, skipping its meta line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.starts_with("{\"meta\"") => {}
        _ => return Err(DataError(format!("{}: missing meta line", path.display())).into()),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| DataError(format!("{}:{}: {e}", path.display(), i + 1)).into()))
        .collect()
}
