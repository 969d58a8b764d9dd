use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    /// Subcommand words, e.g. `demo evd`.
    pub subcommand: String,
    /// Positional arguments as given.
    pub arguments: Vec<String>,
    /// Every resolved parameter, keyed by flag name.
    pub params: Map<String, Value>,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub output_dir: String,
    pub outputs: Vec<String>,
    pub version: String,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| {
            CliError::Usage(format!("{} is not a run manifest: {e}", path.display()))
        })?;
        if m.format_version != crate::output::FORMAT_VERSION {
            return Err(CliError::Usage(format!(
                "manifest format version {} is not supported",
                m.format_version
            )));
        }
        Ok(m)
    }

    /// Command line that repeats this run, writing to `out` if given.
    pub fn replay_argv(&self, out: Option<PathBuf>) -> CliResult<Vec<OsString>> {
        let mut argv: Vec<OsString> = vec!["identikit".into()];
        argv.extend(self.subcommand.split_whitespace().map(OsString::from));
        argv.extend(self.arguments.iter().map(OsString::from));
        for (key, value) in &self.params {
            match value {
                Value::Bool(true) => argv.push(format!("--{key}").into()),
                Value::Bool(false) => {}
                Value::String(s) => {
                    argv.push(format!("--{key}").into());
                    argv.push(s.into());
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "manifest parameter `{key}` has unexpected value {other}"
                    )));
                }
            }
        }
        argv.push("--out".into());
        argv.push(
            out.unwrap_or_else(|| PathBuf::from(&self.output_dir))
                .into(),
        );
        Ok(argv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_argv_orders_words_positionals_then_flags() {
        let mut params = Map::new();
        params.insert("emit-plot-data".into(), Value::Bool(false));
        params.insert("seed".into(), Value::String("4".into()));
        params.insert("stationary".into(), Value::Bool(true));
        let m = RunManifest {
            format_version: 1,
            subcommand: "demo evd".into(),
            arguments: vec!["a.csv".into()],
            params,
            seed: 4,
            inputs: vec![],
            output_dir: "o".into(),
            outputs: vec![],
            version: "0".into(),
            duration_seconds: 0.0,
        };
        let argv: Vec<String> = m
            .replay_argv(None)
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(
            argv,
            [
                "identikit",
                "demo",
                "evd",
                "a.csv",
                "--seed",
                "4",
                "--stationary",
                "--out",
                "o"
            ]
        );
    }
}
