//! Report writers. Every file starts with the config hash and harness seed,
//! and every float is written with 17 significant digits.

use serde::Serialize;
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Identifies the inputs behind an output file.
#[derive(Clone, Debug)]
pub struct Stamp {
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl Stamp {
    pub fn new(canonical: &str, seed: Option<u64>) -> Self {
        let digest = Sha256::digest(canonical.as_bytes());
        let config_hash = digest.iter().map(|b| format!("{b:02x}")).collect();
        Stamp { config_hash, seed }
    }

    fn seed_text(&self) -> String {
        self.seed.map_or_else(|| "none".into(), |s| s.to_string())
    }

    pub fn csv_header(&self) -> String {
        format!("# config_hash={} seed={}", self.config_hash, self.seed_text())
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rewrites every non-integer number with 17 significant digits.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if !text.contains(['.', 'e', 'E']) {
                return Value::Number(n);
            }
            match n.as_f64() {
                Some(x) if x.is_finite() => {
                    let s = fmt_f64(x);
                    Value::Number(serde_json::from_str::<Number>(&s).expect("formatted float is a JSON number"))
                }
                _ => Value::Number(n),
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

pub struct OutputDir {
    pub path: PathBuf,
    pub stamp: Stamp,
}

impl OutputDir {
    pub fn create(path: &Path, stamp: Stamp) -> std::io::Result<Self> {
        fs::create_dir_all(path)?;
        Ok(OutputDir { path: path.to_path_buf(), stamp })
    }

    /// Writes `body` under `config_hash` and `seed` keys.
    pub fn write_json(&self, name: &str, body: &impl Serialize) -> std::io::Result<PathBuf> {
        let mut root = serde_json::Map::new();
        root.insert("config_hash".into(), Value::String(self.stamp.config_hash.clone()));
        root.insert("seed".into(), self.stamp.seed.map_or(Value::Null, Value::from));
        let body = serde_json::to_value(body).map_err(std::io::Error::other)?;
        match body {
            Value::Object(map) => root.extend(map),
            other => {
                root.insert("data".into(), other);
            }
        }
        let text = serde_json::to_string_pretty(&normalize(Value::Object(root))).map_err(std::io::Error::other)?;
        let path = self.path.join(name);
        fs::write(&path, text + "\n")?;
        Ok(path)
    }

    /// Writes a stamped CSV; cells are written as given.
    pub fn write_csv(&self, name: &str, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<PathBuf> {
        let path = self.path.join(name);
        let mut out = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(out, "{}", self.stamp.csv_header())?;
        writeln!(out, "{}", columns.join(","))?;
        for row in rows {
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()?;
        Ok(path)
    }

    /// A stamped file filled by `fill`.
    pub fn write_with(&self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> std::io::Result<PathBuf> {
        let mut buf = Vec::new();
        writeln!(buf, "{}", self.stamp.csv_header())?;
        fill(&mut buf)?;
        let path = self.path.join(name);
        fs::write(&path, buf)?;
        Ok(path)
    }
}
