//! Run manifests recorded next to every output.

use std::path::Path;
use std::process::Command;

use serde::{Deserialize, Serialize};

/// `git describe --always --dirty --tags` of the working directory, if any.
pub fn git_describe() -> Option<String> {
    let out = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()?;
    if !out.status.success() {
        return None;
    }
    let s = String::from_utf8(out.stdout).ok()?.trim().to_string();
    (!s.is_empty()).then_some(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub git_describe: Option<String>,
    pub seed: u64,
    pub params: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, params: impl Serialize) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            git_describe: git_describe(),
            seed,
            params: serde_json::to_value(params).expect("parameters serialize"),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("manifest serializes"))
    }
}
