//! Flat `key = value` settings shared by config files and command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, found `{line}`", i + 1))?;
            let key = normalize(k.trim());
            if key.is_empty() {
                bail!("line {}: empty key", i + 1);
            }
            out.values.insert(key, v.trim().to_string());
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(normalize(key), value.to_string());
    }

    /// Inserts `value` when present, replacing any existing entry.
    pub fn set_opt<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| anyhow!("invalid value `{v}` for `{key}`: {e}"))
            })
            .transpose()
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(other) => bail!("invalid boolean `{other}` for `{key}`"),
        }
    }

    /// A `lo,hi` pair.
    pub fn get_range(&self, key: &str) -> Result<Option<(f64, f64)>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("invalid range `{v}` for `{key}` (expected lo,hi)"))
        };
        let (lo, hi) = v
            .split_once(',')
            .ok_or_else(|| anyhow!("invalid range `{v}` for `{key}` (expected lo,hi)"))?;
        Ok(Some((parse(lo)?, parse(hi)?)))
    }

    /// Fails on any key outside `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        if let Some(k) = self.values.keys().find(|k| !known.contains(&k.as_str())) {
            bail!("unknown setting `{k}`");
        }
        Ok(())
    }

    pub fn merge_from(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }
}

fn normalize(key: &str) -> String {
    key.trim_start_matches("--").replace('_', "-")
}
