use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::Context;
use serde_json::{Map, Value};

use crate::{CliError, CliResult};

/// Parses `key = value` lines. `#` starts a comment; keys may use `_` or `-`.
pub fn parse(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected `key = value`",
                n + 1
            )));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
        }
        out.insert(key, v.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

pub fn load(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse(&text)
}

/// Resolves each parameter as flag, then config file, then default, and
/// records the resolved value for the manifest.
pub struct Params {
    file: BTreeMap<String, String>,
    consulted: BTreeSet<String>,
    resolved: Map<String, Value>,
}

impl Params {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            consulted: BTreeSet::new(),
            resolved: Map::new(),
        }
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.consulted.insert(key.to_string());
        let v = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => s.parse().map_err(|e| {
                CliError::Usage(format!("config key `{key}`: invalid value `{s}`: {e}"))
            })?,
            (None, None) => default,
        };
        self.resolved
            .insert(key.to_string(), Value::String(v.to_string()));
        Ok(v)
    }

    pub fn switch(&mut self, key: &str, flag: bool) -> CliResult<bool> {
        self.consulted.insert(key.to_string());
        let v = flag
            || match self.file.get(key).map(|s| s.to_ascii_lowercase()) {
                None => false,
                Some(s) if s == "true" || s == "1" || s == "yes" => true,
                Some(s) if s == "false" || s == "0" || s == "no" => false,
                Some(s) => {
                    return Err(CliError::Usage(format!(
                        "config key `{key}`: expected true or false, got `{s}`"
                    )))
                }
            };
        self.resolved.insert(key.to_string(), Value::Bool(v));
        Ok(v)
    }

    /// Marks a config key as handled outside the recorded parameters.
    pub fn mark_used(&mut self, key: &str) {
        self.consulted.insert(key.to_string());
    }

    /// Config keys that no parameter of the command asked for.
    pub fn unused_keys(&self) -> Vec<&str> {
        self.file
            .keys()
            .filter(|k| !self.consulted.contains(*k))
            .map(String::as_str)
            .collect()
    }

    pub fn into_resolved(self) -> Map<String, Value> {
        self.resolved
    }
}
