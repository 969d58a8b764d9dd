//! Bivariate causal-direction procedures.

mod anm;
mod carefl;
mod nonsens;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use anm::{discover_anm, nadaraya_watson_residuals, BandwidthPolicy, DEFAULT_BANDWIDTH_FACTOR};
pub use carefl::{discover_carefl, AffineFlow, BaseDensity, FlowConfig, FlowFit, DEFAULT_MARGIN};
pub use nonsens::{
    discover_nonsens, nonsens_decision, NonsensConfig, MIN_SEGMENTS, RECOMMENDED_SEGMENT_ROWS,
};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::independence::TestReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    X1ToX2,
    X2ToX1,
    NoEdge,
    Inconclusive,
}

impl Direction {
    /// The verdict for the same data with its two columns exchanged.
    pub fn swapped(self) -> Self {
        match self {
            Direction::X1ToX2 => Direction::X2ToX1,
            Direction::X2ToX1 => Direction::X1ToX2,
            other => other,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::X1ToX2 => "x1_to_x2",
            Direction::X2ToX1 => "x2_to_x1",
            Direction::NoEdge => "no_edge",
            Direction::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Nonsens,
    Anm,
    Carefl,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Nonsens => "nonsens",
            Method::Anm => "anm",
            Method::Carefl => "carefl",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonsens" => Ok(Method::Nonsens),
            "anm" => Ok(Method::Anm),
            "carefl" => Ok(Method::Carefl),
            other => Err(Error::Parse(format!(
                "unknown method '{other}' (nonsens|anm|carefl)"
            ))),
        }
    }
}

/// An independence test between an observed variable (`observed`, 0-based
/// column) and a derived quantity such as an estimated disturbance or a
/// regression residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTest {
    pub observed: usize,
    pub against: String,
    pub report: TestReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalVerdict {
    pub direction: Direction,
    pub method: Method,
    pub tests: Vec<NamedTest>,
    /// Held-out mean log-likelihood per sample of the models `x1 -> x2` and
    /// `x2 -> x1` (affine-flow method only).
    pub log_likelihoods: Option<(f64, f64)>,
    pub confidence_note: String,
}

impl CausalVerdict {
    fn swapped(mut self) -> Self {
        self.direction = self.direction.swapped();
        for t in &mut self.tests {
            t.observed = 1 - t.observed;
            t.against = swap_labels(&t.against);
        }
        self.log_likelihoods = self.log_likelihoods.map(|(a, b)| (b, a));
        self
    }
}

fn swap_labels(s: &str) -> String {
    s.replace("x1", "\u{0}")
        .replace("x2", "x1")
        .replace('\u{0}', "x2")
}

fn check_pair(data: &Dataset) -> Result<()> {
    if data.n_cols() != 2 {
        return Err(Error::Shape(format!(
            "expected 2 columns, got {}",
            data.n_cols()
        )));
    }
    Ok(())
}

/// Runs `f` on the two columns in a canonical order (lexicographic on the
/// column values) and maps the verdict back, so exchanging the columns of
/// the input exchanges the verdict exactly.
fn canonical<F>(data: &Dataset, f: F) -> Result<CausalVerdict>
where
    F: FnOnce(&Dataset) -> Result<CausalVerdict>,
{
    check_pair(data)?;
    let (a, b) = (data.column(0), data.column(1));
    let swap = a
        .iter()
        .zip(&b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .is_some_and(|o| o.is_gt());
    if swap {
        Ok(f(&data.select_columns(&[1, 0])?)?.swapped())
    } else {
        f(data)
    }
}
