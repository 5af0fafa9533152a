//! `key = value` run configuration files.
//!
//! Keys mirror the long command line flags (`domain`, `datum`, `scheme`, `p`,
//! `lambda`, `T`, `mesh-level`, `nk`, `out`, `jacobi`, `cg-tol`,
//! `picard-tol`, `picard-max-iter`); `_` and `-` are interchangeable. Blank
//! lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

const KEYS: [&str; 13] =
    ["domain", "datum", "scheme", "p", "lambda", "T", "mesh-level", "nk", "out", "jacobi", "cg-tol", "picard-tol", "picard-max-iter"];

/// Parsed configuration: raw string values by canonical key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    path: PathBuf,
    values: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Config { path: path.to_path_buf(), line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            let key = k.trim().replace('_', "-");
            let key = if key.eq_ignore_ascii_case("t") { "T".to_string() } else { key };
            if !KEYS.contains(&key.as_str()) {
                return Err(err(format!("unknown key `{}`", k.trim())));
            }
            if values.insert(key, (i + 1, v.trim().to_string())).is_some() {
                return Err(err(format!("duplicate key `{}`", k.trim())));
            }
        }
        Ok(Config { path: path.to_path_buf(), values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    /// Parse `key` with `parse`, reporting the line on failure.
    pub fn get<T>(&self, key: &str, parse: impl FnOnce(&str) -> Option<T>) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => parse(v)
                .map(Some)
                .ok_or_else(|| Error::Config { path: self.path.clone(), line: *line, msg: format!("invalid value `{v}` for {key}") }),
        }
    }
}
