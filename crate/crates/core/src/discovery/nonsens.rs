use serde::{Deserialize, Serialize};

use super::{canonical, CausalVerdict, Direction, Method, NamedTest};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::independence::{hsic_test, TestConfig};
use crate::nica::{train_nica, TrainConfig};

pub const MIN_SEGMENTS: usize = 8;
pub const RECOMMENDED_SEGMENT_ROWS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct NonsensConfig {
    pub nica: TrainConfig,
    pub test: TestConfig,
}

/// Verdict from the rejection pattern, `reject[v][k]` being the test of
/// observed `x_{v+1}` against estimated disturbance `k`.
///
/// A single non-rejection points at its observed variable as the cause; four
/// non-rejections mean no edge; any other pattern is inconclusive.
pub fn nonsens_decision(reject: [[bool; 2]; 2]) -> Direction {
    let accepted: Vec<usize> = (0..2)
        .flat_map(|v| (0..2).filter(move |&k| !reject[v][k]).map(move |_| v))
        .collect();
    match accepted.as_slice() {
        [0] => Direction::X1ToX2,
        [1] => Direction::X2ToX1,
        [_, _, _, _] => Direction::NoEdge,
        _ => Direction::Inconclusive,
    }
}

fn inconclusive(note: String) -> CausalVerdict {
    CausalVerdict {
        direction: Direction::Inconclusive,
        method: Method::Nonsens,
        tests: Vec::new(),
        log_likelihoods: None,
        confidence_note: note,
    }
}

/// Nonlinear ICA on the segment-labelled pair, then four independence tests
/// between each observed variable and each estimated disturbance.
pub fn discover_nonsens(
    data: &Dataset,
    nica_cfg: &TrainConfig,
    test_cfg: &TestConfig,
) -> Result<CausalVerdict> {
    super::check_pair(data)?;
    let Some(labels) = data.segment_labels() else {
        return Err(Error::Precondition("segment labels are required".into()));
    };
    let segments = data.n_segments();
    if segments < 2 {
        return Ok(inconclusive(
            "single segment: the data are stationary and the nonlinear model is unidentifiable"
                .into(),
        ));
    }
    let mut notes = Vec::new();
    if segments < MIN_SEGMENTS {
        notes.push(format!(
            "only {segments} segments (at least {MIN_SEGMENTS} expected)"
        ));
    }
    let mut counts = vec![0usize; segments];
    for &l in labels {
        counts[l] += 1;
    }
    if counts.iter().any(|&c| c < RECOMMENDED_SEGMENT_ROWS) {
        notes.push(format!(
            "some segments have fewer than {RECOMMENDED_SEGMENT_ROWS} rows"
        ));
    }
    canonical(data, |d| {
        let nica = train_nica(d, nica_cfg)?;
        let mut tests = Vec::with_capacity(4);
        let mut reject = [[false; 2]; 2];
        for (v, row) in reject.iter_mut().enumerate() {
            let x = d.column(v);
            for (k, slot) in row.iter_mut().enumerate() {
                let e: Vec<f64> = nica.components.column(k).iter().copied().collect();
                let report = hsic_test(&x, &e, test_cfg)?;
                *slot = report.reject;
                tests.push(NamedTest {
                    observed: v,
                    against: format!("e{}", k + 1),
                    report,
                });
            }
        }
        let direction = nonsens_decision(reject);
        let mut notes = notes.clone();
        match direction {
            Direction::NoEdge => notes.push(
                "no test rejects: observations look independent of both disturbances, read as no edge".into(),
            ),
            Direction::Inconclusive => notes.push("rejection pattern does not single out a cause".into()),
            _ => {}
        }
        notes.extend(nica.warnings.iter().cloned());
        Ok(CausalVerdict {
            direction,
            method: Method::Nonsens,
            tests,
            log_likelihoods: None,
            confidence_note: notes.join("; "),
        })
    })
}
