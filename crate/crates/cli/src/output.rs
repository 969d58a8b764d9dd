use std::path::{Path, PathBuf};

use anyhow::Context;
use identikit::data::round_sig;
use identikit::format_number;
use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::CliResult;

pub const FORMAT_VERSION: u32 = 1;

/// Rounds every floating-point number in `v` to 12 significant digits.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// A JSON object with `format_version` first, followed by the fields of `body`.
pub fn versioned<T: Serialize>(body: &T) -> CliResult<Value> {
    let mut doc = Map::new();
    doc.insert("format_version".into(), Value::from(FORMAT_VERSION));
    match serde_json::to_value(body)? {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    Ok(Value::Object(doc))
}

/// Files written by one run, relative to its output directory.
pub struct Outputs {
    pub dir: PathBuf,
    pub written: Vec<String>,
}

impl Outputs {
    pub fn create(dir: PathBuf) -> CliResult<Self> {
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    fn claim(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    pub fn json(&mut self, name: &str, value: Value) -> CliResult<()> {
        let mut value = value;
        round_numbers(&mut value);
        let path = self.claim(name);
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        write(&path, text.as_bytes())
    }

    pub fn dataset(&mut self, name: &str, data: &identikit::Dataset) -> CliResult<()> {
        let path = self.claim(name);
        data.write_csv(&path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    /// Writes a CSV with the given header; numeric cells use 12 significant
    /// digits.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> CliResult<()> {
        let path = self.claim(name);
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
