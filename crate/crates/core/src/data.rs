//! The observation matrix shared by every estimator, plus its CSV form.
//!
//! CSV layout: a header row naming variable columns `x1..xn`, an optional
//! integer `segment` column and an optional `t` column. Comma separated,
//! decimal point, UTF-8.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Samples x variables matrix with optional segment labels and time index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
    segment_labels: Option<Vec<usize>>,
    time_index: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 rows, got {}",
                values.nrows()
            )));
        }
        if values.ncols() < 1 {
            return Err(Error::InvalidData("need at least 1 column".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::InvalidData(format!(
                "non-finite entry at row {r}, column {c}"
            )));
        }
        Ok(Self {
            values,
            segment_labels: None,
            time_index: None,
        })
    }

    /// Builds a dataset from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Shape("columns have different lengths".into()));
        }
        Self::new(DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]))
    }

    /// Attaches segment labels; they must cover `{0, ..., T}` without gaps.
    pub fn with_segments(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n_rows() {
            return Err(Error::Shape(format!(
                "segment labels: expected {} entries, got {}",
                self.n_rows(),
                labels.len()
            )));
        }
        let max = labels.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; max + 1];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidData(format!(
                "segment labels are not contiguous: label {missing} is missing"
            )));
        }
        self.segment_labels = Some(labels);
        Ok(self)
    }

    pub fn with_time_index(mut self, t: Vec<f64>) -> Result<Self> {
        if t.len() != self.n_rows() {
            return Err(Error::Shape(format!(
                "time index: expected {} entries, got {}",
                self.n_rows(),
                t.len()
            )));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(
                "time index must be finite and strictly increasing".into(),
            ));
        }
        self.time_index = Some(t);
        Ok(self)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j).iter().copied().collect()
    }

    pub fn segment_labels(&self) -> Option<&[usize]> {
        self.segment_labels.as_deref()
    }

    pub fn time_index(&self) -> Option<&[f64]> {
        self.time_index.as_deref()
    }

    /// Number of distinct segments (1 when unlabeled).
    pub fn n_segments(&self) -> usize {
        self.segment_labels
            .as_ref()
            .map_or(1, |l| l.iter().copied().max().unwrap_or(0) + 1)
    }

    /// Dataset with the given columns in the given order; labels and time
    /// index are carried over.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_cols()) {
            return Err(Error::Shape(format!("column {bad} out of range")));
        }
        let values = DMatrix::from_fn(self.n_rows(), cols.len(), |i, j| self.values[(i, cols[j])]);
        Ok(Self {
            values,
            segment_labels: self.segment_labels.clone(),
            time_index: self.time_index.clone(),
        })
    }

    /// Replaces the values, keeping labels and time index.
    pub fn with_values(&self, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != self.n_rows() {
            return Err(Error::Shape("row count changed".into()));
        }
        let mut d = Self::new(values)?;
        d.segment_labels = self.segment_labels.clone();
        d.time_index = self.time_index.clone();
        Ok(d)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut var_cols: Vec<(usize, usize)> = Vec::new();
        let mut seg_col = None;
        let mut t_col = None;
        for (pos, name) in headers.iter().enumerate() {
            let name = name.trim();
            match name {
                "segment" => seg_col = Some(pos),
                "t" => t_col = Some(pos),
                _ => {
                    let idx = name
                        .strip_prefix('x')
                        .and_then(|s| s.parse::<usize>().ok())
                        .filter(|&i| i >= 1)
                        .ok_or_else(|| Error::Parse(format!("unexpected column `{name}`")))?;
                    var_cols.push((idx - 1, pos));
                }
            }
        }
        var_cols.sort_unstable();
        if var_cols.iter().enumerate().any(|(k, &(i, _))| k != i) {
            return Err(Error::Parse(
                "variable columns must be named x1..xn without gaps".into(),
            ));
        }
        let n = var_cols.len();
        let mut flat = Vec::new();
        let mut segs = Vec::new();
        let mut ts = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |pos: usize| -> Result<&str> {
                rec.get(pos)
                    .map(str::trim)
                    .ok_or_else(|| Error::Parse(format!("row {}: missing field", line + 2)))
            };
            for &(_, pos) in &var_cols {
                let s = field(pos)?;
                flat.push(s.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("row {}: `{s}` is not a number", line + 2))
                })?);
            }
            if let Some(pos) = seg_col {
                let s = field(pos)?;
                segs.push(s.parse::<usize>().map_err(|_| {
                    Error::Parse(format!(
                        "row {}: segment `{s}` is not a non-negative integer",
                        line + 2
                    ))
                })?);
            }
            if let Some(pos) = t_col {
                let s = field(pos)?;
                ts.push(s.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("row {}: t `{s}` is not a number", line + 2))
                })?);
            }
        }
        let rows = if n == 0 { 0 } else { flat.len() / n };
        let mut d = Self::new(DMatrix::from_row_slice(rows, n, &flat))?;
        if seg_col.is_some() {
            d = d.with_segments(segs)?;
        }
        if t_col.is_some() {
            d = d.with_time_index(ts)?;
        }
        Ok(d)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.to_csv_writer(std::io::BufWriter::new(file))
    }

    pub fn to_csv_writer(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.n_cols()).map(|j| format!("x{j}")).collect();
        if self.segment_labels.is_some() {
            header.push("segment".into());
        }
        if self.time_index.is_some() {
            header.push("t".into());
        }
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec: Vec<String> = self
                .values
                .row(i)
                .iter()
                .map(|&v| format_number(v))
                .collect();
            if let Some(l) = &self.segment_labels {
                rec.push(l[i].to_string());
            }
            if let Some(t) = &self.time_index {
                rec.push(format_number(t[i]));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats `v` with 12 significant digits, `%g` style.
pub fn format_number(v: f64) -> String {
    const SIG: usize = 12;
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..SIG as i32).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (SIG as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

/// Rounds `v` to 12 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if v.is_finite() {
        format_number(v).parse().unwrap_or(v)
    } else {
        v
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
