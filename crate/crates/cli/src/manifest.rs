//! Run manifests written next to every artifact.
//!
//! `<artifact>.manifest.json` records the exact argument list, input and output
//! digests, seeds and tool version. Everything except `created_unix` is a pure
//! function of the inputs and arguments, and `aurc rerun` replays a manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Arguments after the program name, exactly as given.
    pub args: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub seed: Option<u64>,
    pub tie_seed: Option<u64>,
    pub rng: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` wins when set.
    pub created_unix: u64,
}

pub fn digest(path: &Path) -> Result<FileDigest, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len() as u64,
    })
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(MANIFEST_SUFFIX);
    PathBuf::from(name)
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

impl RunManifest {
    pub fn new(subcommand: &str, args: &[String]) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            args: args.to_vec(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            tie_seed: None,
            rng: aurc_core::seed::RNG_ALGORITHM.to_string(),
            created_unix: timestamp(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Data(aurc_core::Error::Invalid(format!("{}: {e}", path.display()))))
    }

    /// Digests inputs and outputs, then writes the manifest next to the first output.
    pub fn finish(mut self, inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<PathBuf, CliError> {
        self.inputs = inputs.iter().map(|p| digest(p)).collect::<Result<_, _>>()?;
        self.outputs = outputs.iter().map(|p| digest(p)).collect::<Result<_, _>>()?;
        let target = manifest_path(outputs.first().expect("manifest needs an output"));
        let mut text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        text.push('\n');
        fs::write(&target, text).map_err(|e| CliError::io(&target, e))?;
        Ok(target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        fs::write(&path, "abc").unwrap();
        let d = digest(&path).unwrap();
        assert_eq!(d.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(d.bytes, 3);
    }

    #[test]
    fn manifest_sits_next_to_artifact() {
        assert_eq!(manifest_path(Path::new("out/model.json")), PathBuf::from("out/model.json.manifest.json"));
    }
}
