//! Plain-text `key = value` configuration files.
//!
//! Used for ingest field mappings and experiment spec files. Blank lines and
//! lines starting with `#` are ignored; keys are unique.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::config(format!("line {}: empty key", lineno + 1)));
            }
            if entries
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(KvConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::config(format!("missing required key `{key}`")))
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::config(format!("key `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Canonical `key=value\n` rendering in sorted key order.
    pub fn canonical(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_spacing() {
        let cfg = KvConfig::parse("# header\n\nfolds=5\n grid.step = 0.1 \n").unwrap();
        assert_eq!(cfg.get("folds"), Some("5"));
        assert_eq!(cfg.parse_opt::<f64>("grid.step").unwrap(), Some(0.1));
        assert_eq!(cfg.canonical(), "folds=5\ngrid.step=0.1\n");
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(KvConfig::parse("a=1\na=2").is_err());
        assert!(KvConfig::parse("no separator").is_err());
        assert!(KvConfig::parse("=1").is_err());
    }

    #[test]
    fn typed_errors_name_the_key() {
        let cfg = KvConfig::parse("folds=five").unwrap();
        let err = cfg.parse_opt::<usize>("folds").unwrap_err().to_string();
        assert!(err.contains("folds"), "{err}");
        assert!(cfg.require("seed").is_err());
    }
}
