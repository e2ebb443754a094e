use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Provenance record written next to every output as `<output>.manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 over the command name, its canonical parameters and the
    /// bytes of every input file.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub dtdm: String,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            dtdm: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Hex SHA-256 of the command, canonical parameter text and input contents.
pub fn config_hash(command: &str, canonical: &str, input_bytes: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    for part in [command.as_bytes(), canonical.as_bytes()] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    for bytes in input_bytes {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

impl RunManifest {
    pub fn write_beside(&self, output: &Path) -> Result<PathBuf> {
        let path = manifest_path(output);
        crate::formats::write_json(self, &path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash("simulate", "seed=7\n", &[b"x".to_vec()]);
        assert_eq!(a, config_hash("simulate", "seed=7\n", &[b"x".to_vec()]));
        assert_eq!(a.len(), 64);
        assert_ne!(a, config_hash("simulate", "seed=8\n", &[b"x".to_vec()]));
        assert_ne!(a, config_hash("simulate", "seed=7\n", &[b"y".to_vec()]));
        assert_ne!(config_hash("ab", "c", &[]), config_hash("a", "bc", &[]));
    }

    #[test]
    fn manifest_sits_beside_output() {
        assert_eq!(manifest_path(Path::new("out/sig.csv")), Path::new("out/sig.csv.manifest.json"));
    }
}
