use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::error::{CliError, CliResult};
use crate::json::to_canonical;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timestamps {
    pub started: String,
    pub finished: String,
}

/// Provenance record written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical JSON of the effective inputs.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub timestamps: Timestamps,
    pub outputs: Vec<OutputRecord>,
    pub library_version: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Timestamps come from `SOURCE_DATE_EPOCH` (seconds), defaulting to the
/// Unix epoch, so repeated runs produce identical manifests.
fn timestamp() -> CliResult<String> {
    let secs = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => s
            .trim()
            .parse::<i64>()
            .map_err(|_| CliError::Validation(format!("SOURCE_DATE_EPOCH is not an integer: {s:?}")))?,
        Err(_) => 0,
    };
    let t = OffsetDateTime::from_unix_timestamp(secs)
        .map_err(|e| CliError::Validation(format!("SOURCE_DATE_EPOCH out of range: {e}")))?;
    t.format(&Rfc3339).map_err(|e| CliError::Validation(e.to_string()))
}

/// Files produced by a command, held in memory until everything has been
/// validated and computed.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let v = serde_json::to_value(value).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        self.add(name, to_canonical(&v).into_bytes());
        Ok(())
    }

    /// Writes all files plus a manifest into `dir`, returning the manifest.
    pub fn commit(
        self,
        dir: &Path,
        manifest_name: &str,
        command: &str,
        config: &Value,
        seed: Option<u64>,
    ) -> CliResult<RunManifest> {
        let stamp = timestamp()?;
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut outputs = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path: PathBuf = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            outputs.push(OutputRecord {
                file: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            });
        }
        let manifest = RunManifest {
            command: command.into(),
            config_hash: sha256_hex(to_canonical(config).as_bytes()),
            seed,
            timestamps: Timestamps {
                started: stamp.clone(),
                finished: stamp,
            },
            outputs,
            library_version: env!("CARGO_PKG_VERSION").into(),
        };
        let path = dir.join(manifest_name);
        let v = serde_json::to_value(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&path, to_canonical(&v)).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
