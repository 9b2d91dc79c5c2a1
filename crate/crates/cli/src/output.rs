use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub input_digest: String,
    pub tool_version: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Where a command writes, and the manifest every file carries.
pub struct Sink {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub config: Value,
}

impl Sink {
    pub fn new(dir: &Path, manifest: Manifest, config: Value) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            config,
        })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
    }

    /// A `#` manifest line followed by whatever `body` writes.
    pub fn csv<F>(&self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        let line = serde_json::to_string(&self.manifest).expect("manifest serializes");
        writeln!(buf, "# {line}").expect("write to memory");
        body(&mut buf).map_err(|e| CliError::io(&self.dir.join(name), e))?;
        self.write(name, &buf)
    }

    /// JSON object with the manifest under `"manifest"`.
    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> Result<(), CliError> {
        let mut value = serde_json::to_value(body).expect("output serializes");
        if let Value::Object(map) = &mut value {
            map.insert(
                "manifest".into(),
                serde_json::to_value(&self.manifest).expect("manifest serializes"),
            );
        }
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Echo of the resolved configuration.
    pub fn echo_config(&self) -> Result<(), CliError> {
        self.json("config.json", &self.config)
    }
}
