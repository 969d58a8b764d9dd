//! HSIC kernel independence test with a permutation null.

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest sample used as-is; bigger inputs are subsampled to
/// `SUBSAMPLE_SIZE` rows.
pub const MAX_EXACT_ROWS: usize = 2000;
pub const SUBSAMPLE_SIZE: usize = 1000;
/// Below this many rows the report is flagged as low power.
pub const LOW_POWER_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub n_permutations: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            n_permutations: 500,
            alpha: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub alpha: f64,
    pub reject: bool,
    pub bandwidths: (f64, f64),
    /// Rows actually used (after subsampling).
    pub n_used: usize,
    pub low_power: bool,
}

fn check_not_constant(x: &[f64], what: &str) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::ZeroVariance(format!("{what} is constant")));
    }
    Ok(())
}

/// Median of all pairwise absolute differences (a strided subsample of
/// `MAX_EXACT_ROWS` points is used for longer inputs). When more than half
/// of the differences are zero, the median of the positive ones is used.
pub fn median_heuristic(x: &[f64]) -> Result<f64> {
    check_not_constant(x, "sample")?;
    let pts: Vec<f64> = if x.len() > MAX_EXACT_ROWS {
        let stride = x.len() as f64 / MAX_EXACT_ROWS as f64;
        (0..MAX_EXACT_ROWS)
            .map(|k| x[(k as f64 * stride) as usize])
            .collect()
    } else {
        x.to_vec()
    };
    let n = pts.len();
    let mut diffs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            diffs.push((pts[i] - pts[j]).abs());
        }
    }
    let m = crate::stats::median_in_place(&mut diffs);
    if m > 0.0 {
        return Ok(m);
    }
    let mut pos: Vec<f64> = diffs.into_iter().filter(|&d| d > 0.0).collect();
    if pos.is_empty() {
        return Err(Error::ZeroVariance("subsample is constant".into()));
    }
    Ok(crate::stats::median_in_place(&mut pos))
}

/// Doubly centered Gaussian Gram matrix, row-major.
fn centered_gram(x: &[f64], bw: f64) -> Vec<f64> {
    let n = x.len();
    let c = -0.5 / (bw * bw);
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = x[i] - x[j];
            k[i * n + j] = (c * d * d).exp();
        }
    }
    let row_mean: Vec<f64> = (0..n)
        .map(|i| k[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            // the Gram matrix is symmetric, so column means equal row means
            k[i * n + j] += grand - row_mean[i] - row_mean[j];
        }
    }
    k
}

fn pair_sum(k: &[f64], l: &[f64], n: usize, perm: Option<&[usize]>) -> f64 {
    let mut s = 0.0;
    match perm {
        None => {
            for idx in 0..n * n {
                s += k[idx] * l[idx];
            }
        }
        Some(p) => {
            for i in 0..n {
                let lr = &l[p[i] * n..(p[i] + 1) * n];
                let kr = &k[i * n..(i + 1) * n];
                for j in 0..n {
                    s += kr[j] * lr[p[j]];
                }
            }
        }
    }
    s / (n * n) as f64
}

fn check_pair(x: &[f64], y: &[f64], bw_x: f64, bw_y: f64) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "x has {} values, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() > MAX_EXACT_ROWS {
        return Err(Error::Precondition(format!(
            "hsic statistic limited to {MAX_EXACT_ROWS} rows, got {}",
            x.len()
        )));
    }
    if !(bw_x > 0.0 && bw_y > 0.0) {
        return Err(Error::Precondition("bandwidths must be positive".into()));
    }
    check_not_constant(x, "x")?;
    check_not_constant(y, "y")
}

/// Biased HSIC estimate `trace(K~ L~) / n^2` with Gaussian kernels.
pub fn hsic_statistic(x: &[f64], y: &[f64], bw_x: f64, bw_y: f64) -> Result<f64> {
    check_pair(x, y, bw_x, bw_y)?;
    let k = centered_gram(x, bw_x);
    let l = centered_gram(y, bw_y);
    Ok(pair_sum(&k, &l, x.len(), None).max(0.0))
}

/// Permutation test of independence; permutations act on `y` only. Each
/// replicate draws from its own stream, so the p-value does not depend on
/// thread scheduling.
pub fn hsic_test(x: &[f64], y: &[f64], cfg: &TestConfig) -> Result<TestReport> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "x has {} values, y has {}",
            x.len(),
            y.len()
        )));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) || cfg.n_permutations == 0 {
        return Err(Error::Precondition(
            "alpha must be in (0, 1) and permutations positive".into(),
        ));
    }
    let (xs, ys) = if x.len() > MAX_EXACT_ROWS {
        let idx = index::sample(&mut rng::child(cfg.seed, 0), x.len(), SUBSAMPLE_SIZE).into_vec();
        (
            idx.iter().map(|&i| x[i]).collect::<Vec<_>>(),
            idx.iter().map(|&i| y[i]).collect::<Vec<_>>(),
        )
    } else {
        (x.to_vec(), y.to_vec())
    };
    let n = xs.len();
    let bw = (median_heuristic(&xs)?, median_heuristic(&ys)?);
    check_pair(&xs, &ys, bw.0, bw.1)?;
    let k = centered_gram(&xs, bw.0);
    let l = centered_gram(&ys, bw.1);
    let observed = pair_sum(&k, &l, n, None);
    let exceed = (0..cfg.n_permutations)
        .into_par_iter()
        .filter(|&b| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng::child(cfg.seed, b as u64 + 1));
            pair_sum(&k, &l, n, Some(&p)) >= observed
        })
        .count();
    let p_value = (1 + exceed) as f64 / (cfg.n_permutations + 1) as f64;
    Ok(TestReport {
        statistic: observed.max(0.0),
        p_value,
        n_permutations: cfg.n_permutations,
        alpha: cfg.alpha,
        reject: p_value < cfg.alpha,
        bandwidths: bw,
        n_used: n,
        low_power: n < LOW_POWER_ROWS,
    })
}
