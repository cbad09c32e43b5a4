//! Run artifacts: collected in memory, written atomically, indexed by a manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Seed of the named substream: the first eight bytes of `sha256(seed ‖ name)`.
pub fn substream(seed: u64, name: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("eight bytes"))
}

#[derive(Default)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
    pub verdicts: BTreeMap<String, bool>,
    pub summary: Vec<String>,
}

impl Artifacts {
    pub fn file(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.insert(name.to_string(), contents.into());
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
        text.push('\n');
        self.file(name, text);
    }

    pub fn verdict(&mut self, name: &str, pass: bool) {
        self.verdicts.insert(name.to_string(), pass);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn pass(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    /// Write every file, then the manifest, each through a temporary file and a rename.
    pub fn write(mut self, config: &RunConfig) -> Result<Vec<String>> {
        let dir = &config.out_dir;
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let config_text = config.recorded();
        self.file("config.toml", config_text.clone());
        let outputs: BTreeMap<&str, String> = self.files.iter().map(|(k, v)| (k.as_str(), sha256_hex(v))).collect();
        let manifest = json!({
            "experiment": config.experiment.name(),
            "config_sha256": sha256_hex(config_text.as_bytes()),
            "seed": config.seed,
            "versions": {
                "cat0-boundary": cat0_boundary::VERSION,
                "cat0vis": env!("CARGO_PKG_VERSION"),
            },
            "outputs": outputs,
            "verdicts": self.verdicts,
            "pass": self.pass(),
        });
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        for (name, bytes) in &self.files {
            write_atomic(dir, name, bytes)?;
        }
        write_atomic(dir, "manifest.json", text.as_bytes())?;
        let mut names: Vec<String> = self.files.into_keys().collect();
        names.push("manifest.json".into());
        Ok(names)
    }
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let dst = dir.join(name);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, &dst).with_context(|| format!("renaming into {}", dst.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_stable_and_distinct() {
        assert_eq!(substream(7, "boundary"), substream(7, "boundary"));
        assert_ne!(substream(7, "boundary"), substream(7, "interior"));
        assert_ne!(substream(7, "boundary"), substream(8, "boundary"));
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
