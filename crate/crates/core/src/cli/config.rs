//! Plain `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Parsed key/value pairs for one experiment. Unknown keys are rejected at
/// parse time against the command's allowed list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !allowed.contains(&k) {
                return Err(Error::Parse(format!(
                    "line {}: unknown key '{k}' (allowed: {})",
                    lineno + 1,
                    allowed.join(", ")
                )));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path, allowed: &[&str]) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, allowed)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Parse(format!("cannot parse value '{v}' for key '{key}'"))),
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        self.parsed(key, default)
    }

    pub fn u32(&self, key: &str, default: u32) -> Result<u32> {
        self.parsed(key, default)
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        self.parsed(key, default)
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.values.get(key).cloned().unwrap_or_else(|| default.to_string())
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("cannot parse '{s}' in list for key '{key}'")))
                })
                .collect(),
        }
    }

    pub fn u32_list(&self, key: &str, default: &[u32]) -> Result<Vec<u32>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("cannot parse '{s}' in list for key '{key}'")))
                })
                .collect(),
        }
    }
}
