use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One parsed run configuration with command-line overrides applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub doc: toml::Table,
    pub seed: u64,
    pub out: PathBuf,
    /// Hex SHA-256 of the configuration text.
    pub config_hash: String,
    base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::parse(&text, &base, seed, out)
    }

    /// `base_dir` anchors relative paths in the document.
    pub fn parse(text: &str, base_dir: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self> {
        let doc: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        let seed = match seed {
            Some(s) => s,
            None => match doc.get("seed") {
                Some(v) => v
                    .as_integer()
                    .filter(|&s| s >= 0)
                    .ok_or_else(|| Error::Config("seed must be a nonnegative integer".into()))? as u64,
                None => return Err(Error::Config("missing field: seed".into())),
            },
        };
        let out = match out {
            Some(o) => o,
            None => match doc.get("out").and_then(|v| v.as_str()) {
                Some(o) => base_dir.join(o),
                None => return Err(Error::Config("missing field: out (set it in the config or pass --out)".into())),
            },
        };
        let config_hash = hex::encode(Sha256::digest(text.as_bytes()));
        let cfg = RunConfig {
            doc,
            seed,
            out,
            config_hash,
            base_dir: base_dir.to_path_buf(),
        };
        cfg.check_paths()?;
        Ok(cfg)
    }

    /// Comment text written at the top of every output file.
    pub fn provenance(&self, command: &str) -> String {
        format!("readervar {command} config_sha256={} seed={}", self.config_hash, self.seed)
    }

    /// Deserializes `[name]`, or the type's default when absent.
    pub fn section<T: DeserializeOwned + Default>(&self, name: &str) -> Result<T> {
        match self.doc.get(name) {
            Some(v) => v.clone().try_into().map_err(|e| Error::Config(format!("[{name}]: {e}"))),
            None => Ok(T::default()),
        }
    }

    pub fn has(&self, name: &str) -> bool {
        self.doc.contains_key(name)
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        self.base_dir.join(p)
    }

    /// Every `features`, `labels`, `roster` or `predictions` string must
    /// name an existing file.
    fn check_paths(&self) -> Result<()> {
        fn walk(v: &toml::Value, key: &str, cfg: &RunConfig) -> Result<()> {
            match v {
                toml::Value::String(s) if INPUT_KEYS.contains(&key) => {
                    let p = cfg.resolve(s);
                    if !p.is_file() {
                        return Err(Error::Config(format!("{key}: file not found: {}", p.display())));
                    }
                    Ok(())
                }
                toml::Value::Table(t) => t.iter().try_for_each(|(k, v)| walk(v, k, cfg)),
                toml::Value::Array(a) => a.iter().try_for_each(|v| walk(v, key, cfg)),
                _ => Ok(()),
            }
        }
        self.doc.iter().try_for_each(|(k, v)| walk(v, k, self))
    }
}

const INPUT_KEYS: [&str; 4] = ["features", "labels", "roster", "predictions"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_and_out() {
        let dir = Path::new(".");
        let c = RunConfig::parse("seed = 4\nout = \"o\"", dir, None, None).unwrap();
        assert_eq!(c.seed, 4);
        assert_eq!(c.out, dir.join("o"));
        let c = RunConfig::parse("seed = 4", dir, Some(9), Some("x".into())).unwrap();
        assert_eq!((c.seed, c.out), (9, PathBuf::from("x")));
        let err = RunConfig::parse("out = \"o\"", dir, None, None).unwrap_err().to_string();
        assert!(err.contains("missing field: seed"), "{err}");
        assert!(RunConfig::parse("seed = 1", dir, None, None).is_err());
    }

    #[test]
    fn missing_input_file() {
        let err = RunConfig::parse("seed = 1\n[data]\nfeatures = \"nope.csv\"", Path::new("."), None, Some("o".into()))
            .unwrap_err()
            .to_string();
        assert!(err.contains("nope.csv"), "{err}");
    }
}
