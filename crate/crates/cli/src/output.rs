//! Artifact writing. Every file is written to a temporary sibling and
//! renamed into place, so readers never see a partial file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

/// Environment variable that overrides `output.dir`.
pub const OUT_ENV: &str = "BOPO_OUT";

/// Name of the only file allowed to differ between identical runs.
pub const METADATA_FILE: &str = "metadata.json";

pub struct OutputDir {
    pub root: PathBuf,
    pub config_hash: String,
    pub seed: u64,
    started: f64,
}

impl OutputDir {
    pub fn create(cfg: &RunConfig) -> Result<Self> {
        let root = match std::env::var_os(OUT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => cfg.output_dir.clone(),
        };
        Self::at(root, cfg.hash(), cfg.seed)
    }

    /// An output directory not tied to a run configuration.
    pub fn at(root: PathBuf, config_hash: String, seed: u64) -> Result<Self> {
        fs::create_dir_all(&root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(OutputDir { root, config_hash, seed, started: unix_seconds() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Provenance lines for CSV headers.
    pub fn comments(&self) -> Vec<String> {
        vec![format!("config_hash={}", self.config_hash), format!("seed={}", self.seed)]
    }

    pub fn provenance(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("config_hash".to_string(), self.config_hash.clone()),
            ("seed".to_string(), self.seed.to_string()),
        ])
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.path(name), bytes)
    }

    /// CSV body preceded by the provenance comment lines.
    pub fn write_csv(&self, name: &str, body: &str) -> Result<()> {
        let mut s = String::new();
        for c in self.comments() {
            s.push_str("# ");
            s.push_str(&c);
            s.push('\n');
        }
        s.push_str(body);
        self.write_bytes(name, s.as_bytes())
    }

    /// `{"config_hash", "seed", <key>: value}` as pretty JSON.
    pub fn write_json<T: Serialize>(&self, name: &str, key: &str, value: &T) -> Result<()> {
        let doc = Stamped { config_hash: &self.config_hash, seed: self.seed, key, value };
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Timestamps and wall time; excluded from the determinism guarantee.
    pub fn write_metadata(&self, command: &str, extra: BTreeMap<String, f64>) -> Result<()> {
        let finished = unix_seconds();
        let mut m = serde_json::Map::new();
        m.insert("command".into(), command.into());
        m.insert("config_hash".into(), self.config_hash.clone().into());
        m.insert("seed".into(), self.seed.into());
        m.insert("started_unix".into(), self.started.into());
        m.insert("finished_unix".into(), finished.into());
        m.insert("wall_ms".into(), ((finished - self.started) * 1e3).into());
        for (k, v) in extra {
            m.insert(k, v.into());
        }
        let text = serde_json::to_string_pretty(&m)? + "\n";
        self.write_bytes(METADATA_FILE, text.as_bytes())
    }
}

struct Stamped<'a, T> {
    config_hash: &'a str,
    seed: u64,
    key: &'a str,
    value: &'a T,
}

impl<T: Serialize> Serialize for Stamped<'_, T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("config_hash", self.config_hash)?;
        m.serialize_entry("seed", &self.seed)?;
        m.serialize_entry(self.key, self.value)?;
        m.end()
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().context("artifact path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("cannot write {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}
