//! Run directory files. Every file's SHA-256 is recorded in the manifest.

use std::path::{Path, PathBuf};

use digitcast_core::series::format_value;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files into one run directory and remembers their digests.
pub struct RunDir {
    root: PathBuf,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Copies an input file into the run directory as `name`.
    pub fn snapshot(&mut self, source: &Path, name: &str) -> Result<()> {
        let bytes = std::fs::read(source)?;
        std::fs::write(self.path(name), &bytes)?;
        self.inputs.push(FileDigest {
            name: name.to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<()> {
        std::fs::write(self.path(name), content)?;
        self.outputs.push(FileDigest {
            name: name.to_string(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

/// A CSV with a leading 1-based step column `t` and one column per entry
/// of `columns`; all columns must have the same length.
pub fn step_csv(columns: &[(String, Vec<f64>)]) -> String {
    let mut out = String::from("t");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let steps = columns.first().map_or(0, |(_, v)| v.len());
    for t in 0..steps {
        out.push_str(&(t + 1).to_string());
        for (_, values) in columns {
            out.push(',');
            out.push_str(&format_value(Some(values[t])));
        }
        out.push('\n');
    }
    out
}

/// Formats a quantile level for a column name, e.g. `0.1` → `q0.1`.
pub fn quantile_label(level: f64) -> String {
    format!("q{level}")
}
