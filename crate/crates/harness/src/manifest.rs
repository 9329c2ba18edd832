use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Record of one completed run, written next to its artifacts.
///
/// The echoed config is fully resolved (overrides applied, defaults
/// expanded), so `config_hash` pins everything that determined the CSV
/// bytes: identical (config, seed, version) reproduce them exactly.
/// Wall-clock varies between runs, so the manifest itself is not expected
/// to be byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: Value,
    pub artifacts: Vec<String>,
    pub wall_clock_seconds: f64,
    pub version: String,
}

impl RunManifest {
    pub fn new(
        experiment: &str,
        seed: u64,
        config: Value,
        mut artifacts: Vec<String>,
        wall_clock_seconds: f64,
    ) -> RunManifest {
        artifacts.sort();
        RunManifest {
            experiment: experiment.to_string(),
            seed,
            config_hash: hash_config(&config),
            config,
            artifacts,
            wall_clock_seconds,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Run(format!("manifest serialization: {e}")))?;
        std::fs::write(dir.join("manifest.json"), text + "\n")
            .map_err(|e| Error::Run(format!("writing manifest.json: {e}")))
    }
}

/// SHA-256 of the resolved config's canonical JSON bytes.
pub fn hash_config(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("JSON value serializes");
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_key_sensitive() {
        let a = serde_json::json!({"seed": 1, "experiment": "design-run"});
        let b = serde_json::json!({"seed": 2, "experiment": "design-run"});
        assert_eq!(hash_config(&a), hash_config(&a));
        assert_ne!(hash_config(&a), hash_config(&b));
        assert_eq!(hash_config(&a).len(), 64);
    }

    #[test]
    fn artifacts_are_sorted_in_the_manifest() {
        let m = RunManifest::new(
            "design-run",
            1,
            serde_json::json!({}),
            vec!["b.csv".into(), "a.csv".into()],
            0.5,
        );
        assert_eq!(m.artifacts, vec!["a.csv".to_string(), "b.csv".to_string()]);
    }
}
