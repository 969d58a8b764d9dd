//! Linear ICA by symmetric fixed-point iteration in whitened space.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::{linalg, rng, stats, whiten};

/// `E[log cosh(v)]` for `v ~ N(0, 1)`.
pub const LOGCOSH_GAUSSIAN_MEAN: f64 = 0.374567207491;

/// Allowed decrease of the summed contrast per accepted step.
pub const ASCENT_TOLERANCE: f64 = 1e-9;

const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Contrast {
    #[default]
    Logcosh,
    Kurtosis,
}

impl fmt::Display for Contrast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Contrast::Logcosh => "logcosh",
            Contrast::Kurtosis => "kurtosis",
        })
    }
}

impl FromStr for Contrast {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logcosh" => Ok(Contrast::Logcosh),
            "kurtosis" => Ok(Contrast::Kurtosis),
            other => Err(Error::Parse(format!(
                "unknown contrast '{other}' (logcosh|kurtosis)"
            ))),
        }
    }
}

impl Contrast {
    /// Nonlinearity `g = G'` and its derivative.
    fn g(self, u: f64) -> (f64, f64) {
        match self {
            Contrast::Logcosh => {
                let t = u.tanh();
                (t, 1.0 - t * t)
            }
            Contrast::Kurtosis => (u * u * u, 3.0 * u * u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcaConfig {
    pub contrast: Contrast,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for IcaConfig {
    fn default() -> Self {
        Self {
            contrast: Contrast::Logcosh,
            tol: 1e-6,
            max_iter: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcaResult {
    /// Acts on centered raw rows: `components = (x - mean) W^T`.
    #[serde(with = "crate::json::matrix")]
    pub unmixing: DMatrix<f64>,
    #[serde(with = "crate::json::matrix")]
    pub mixing_est: DMatrix<f64>,
    #[serde(skip)]
    pub components: DMatrix<f64>,
    pub contrast_values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Summed contrast after initialization and after every accepted step.
    pub contrast_trace: Vec<f64>,
}

fn logcosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn contrast_of_standardized(z: &[f64], contrast: Contrast) -> f64 {
    match contrast {
        Contrast::Logcosh => {
            let m = z.iter().map(|&u| logcosh(u)).sum::<f64>() / z.len() as f64;
            (m - LOGCOSH_GAUSSIAN_MEAN).powi(2)
        }
        Contrast::Kurtosis => {
            let n = z.len() as f64;
            (z.iter().map(|u| u.powi(4)).sum::<f64>() / n - 3.0).abs()
        }
    }
}

/// Non-Gaussianity of a sample after standardization: `|excess kurtosis|`
/// or the squared deviation of mean log cosh from its Gaussian value.
pub fn nongaussianity(sample: &[f64], contrast: Contrast) -> Result<f64> {
    if sample.len() < 20 {
        return Err(Error::InsufficientData {
            needed: 20,
            got: sample.len(),
        });
    }
    match contrast {
        Contrast::Kurtosis => Ok(stats::excess_kurtosis(sample)?.abs()),
        Contrast::Logcosh => Ok(contrast_of_standardized(
            &stats::standardize(sample)?,
            contrast,
        )),
    }
}

/// Summed contrast of the rows of `w` applied to whitened data `z`.
fn total_contrast(w: &DMatrix<f64>, z: &DMatrix<f64>, contrast: Contrast) -> f64 {
    let y = z * w.transpose();
    y.column_iter()
        .map(|c| contrast_of_standardized(c.as_slice(), contrast))
        .sum()
}

/// `(W W^T)^{-1/2} W`.
fn sym_decorrelate(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(linalg::sym_inv_sqrt(&(w * w.transpose()))? * w)
}

fn fixed_point_step(w: &DMatrix<f64>, z: &DMatrix<f64>, contrast: Contrast) -> DMatrix<f64> {
    let n = z.nrows() as f64;
    let y = z * w.transpose();
    let mut gy = y.clone();
    let mut mean_dg = vec![0.0; w.nrows()];
    for (j, mut col) in gy.column_iter_mut().enumerate() {
        for v in col.iter_mut() {
            let (g, dg) = contrast.g(*v);
            *v = g;
            mean_dg[j] += dg;
        }
    }
    let mut next = gy.transpose() * z / n;
    for i in 0..w.nrows() {
        let r = w.row(i) * mean_dg[i] / n;
        let mut row = next.row_mut(i);
        row -= r;
    }
    next
}

pub fn estimate_ica(data: &Dataset, cfg: &IcaConfig) -> Result<IcaResult> {
    let n = data.n_cols();
    if data.n_rows() < 20 * n {
        return Err(Error::InsufficientData {
            needed: 20 * n,
            got: data.n_rows(),
        });
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let wr = whiten::whiten(data)?;
    let z = wr.whitened.values();
    let mut w = linalg::random_orthogonal(n, &mut rng::child(cfg.seed, 0));
    let mut current = total_contrast(&w, z, cfg.contrast);
    let mut trace = vec![current];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let mut proposal = sym_decorrelate(&fixed_point_step(&w, z, cfg.contrast))?;
        // the contrast is sign-blind; align signs so that interpolation is meaningful
        for i in 0..n {
            if proposal.row(i).dot(&w.row(i)) < 0.0 {
                let mut row = proposal.row_mut(i);
                row.neg_mut();
            }
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = if step == 1.0 {
                proposal.clone()
            } else {
                sym_decorrelate(&(&w * (1.0 - step) + &proposal * step))?
            };
            let value = total_contrast(&cand, z, cfg.contrast);
            if value >= current - ASCENT_TOLERANCE {
                accepted = Some((cand, value));
                break;
            }
            step *= 0.5;
        }
        let Some((next, value)) = accepted else {
            log::debug!("fixed-point step could not be made ascending at iteration {iterations}");
            break;
        };
        let change = (0..n)
            .map(|i| (1.0 - next.row(i).dot(&w.row(i)).abs()).abs())
            .fold(0.0, f64::max);
        w = next;
        current = value;
        trace.push(current);
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("ICA did not converge in {iterations} iterations");
    }

    let y = z * w.transpose();
    let mut scored: Vec<(f64, usize)> = y
        .column_iter()
        .enumerate()
        .map(|(j, c)| (contrast_of_standardized(c.as_slice(), cfg.contrast), j))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = scored.iter().map(|s| s.1).collect();
    let w = linalg::permute_rows(&w, &order);

    let mut unmixing = &w * &wr.transform;
    let mut mixing = unmixing
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Precondition("estimated unmixing matrix is singular".into()))?;
    // sign convention: the largest-magnitude entry of each mixing column is positive
    for j in 0..n {
        let col = mixing.column(j);
        let k = col.iamax();
        if col[k] < 0.0 {
            mixing.column_mut(j).neg_mut();
            unmixing.row_mut(j).neg_mut();
        }
    }
    let components = linalg::center_with(data.values(), &wr.mean) * unmixing.transpose();
    Ok(IcaResult {
        unmixing,
        mixing_est: mixing,
        components,
        contrast_values: scored.iter().map(|s| s.0).collect(),
        iterations,
        converged,
        contrast_trace: trace,
    })
}
