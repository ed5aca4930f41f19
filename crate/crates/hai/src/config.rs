//! World and study configuration files in TOML or JSON.

use std::path::Path;

use hai_core::scm::WorldSpec;
use hai_core::study::StudyConfig;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Failure;

fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let shown = path.display();
    if !path.is_file() {
        return Err(Failure::Unknown(format!("{shown}: no such file")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{shown}: {e}")))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| Failure::Invalid(format!("{shown}: {e}"))),
        Some("json") => serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{shown}: {e}"))),
        _ => Err(Failure::Invalid(format!(
            "{shown}: expected a .toml or .json file"
        ))),
    }
}

pub fn load_world(path: &Path) -> Result<WorldSpec, Failure> {
    let w: WorldSpec = load(path)?;
    w.validate()
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    Ok(w)
}

pub fn load_study(path: &Path) -> Result<StudyConfig, Failure> {
    let c: StudyConfig = load(path)?;
    c.validate()
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    Ok(c)
}

/// SHA-256 of the compact JSON form, hex encoded.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(&json))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hai_core::study::Expectation;
    use std::io::Write;

    fn file(ext: &str, body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn partial_study_toml_keeps_defaults() {
        let f = file(".toml", "[expectations]\nh2c = \"reversed\"\n");
        let c = load_study(f.path()).unwrap();
        assert_eq!(c.expectations.h2c, Expectation::Reversed);
        assert_eq!(c.expectations.h1, Expectation::Supported);
        assert_eq!(c.regular.size, 136);
    }

    #[test]
    fn world_json_and_errors() {
        let f = file(".json", r#"{"resolution": 20, "bind_generic": true}"#);
        let w = load_world(f.path()).unwrap();
        assert_eq!(w.resolution, 20);
        assert!(w.bind_generic);
        let typo = file(".toml", "resolutoin = 3\n");
        assert!(matches!(load_world(typo.path()), Err(Failure::Invalid(_))));
        let bad = file(".toml", "resolution = 0\n");
        assert!(matches!(load_world(bad.path()), Err(Failure::Invalid(_))));
        assert!(matches!(
            load_world(Path::new("/nonexistent/w.toml")),
            Err(Failure::Unknown(_))
        ));
    }

    #[test]
    fn hash_tracks_content() {
        let a = StudyConfig::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.alpha = 0.01;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
