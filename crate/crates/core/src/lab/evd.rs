use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::{SourceDistribution, SourceKind};
use crate::{linalg, rng};

/// Softening of `|s|` in the Laplace-type log-densities.
pub const LOG_DENSITY_SMOOTHING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvdVerdict {
    IdentifiableStructure,
    DegenerateGaussian,
    SignedPermutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvdProbe {
    pub point: Vec<f64>,
    /// Largest off-diagonal magnitude of `A D(x) A^T`.
    pub offdiag: f64,
    /// Smallest gap between two diagonal entries of `D(x)`.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvdCheckReport {
    pub offdiag_residual: f64,
    /// Smallest per-probe spread.
    pub eigenvalue_spread: f64,
    pub verdict: EvdVerdict,
    pub probes: Vec<EvdProbe>,
}

/// Probe points: `n_random` standard Gaussian draws, then for every
/// component one point whose latent coordinate (`A^T x`) for that component
/// is exactly zero, where a Laplace-type log-density is most curved.
pub fn evd_probe_points(a: &DMatrix<f64>, n_random: usize, seed: u64) -> DMatrix<f64> {
    let n = a.nrows();
    let g = SourceDistribution::new(SourceKind::Gaussian);
    let mut r = rng::child(seed, 0);
    let mut rows = g
        .sample_matrix(n_random, n, &mut r)
        .row_iter()
        .map(|v| v.transpose())
        .collect::<Vec<_>>();
    for k in 0..n {
        let mut y = DVector::from_vec(g.sample_vec(n, &mut r));
        y[k] = 0.0;
        rows.push(a * y);
    }
    DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j])
}

/// Evaluates `A D(x) A^T` with `D(x) = diag[(log p)''(y_i)]`, `y = A^T x`,
/// at every probe row of `probes`.
pub fn evd_check(
    a: &DMatrix<f64>,
    dist: &SourceDistribution,
    probes: &DMatrix<f64>,
    tolerance: f64,
) -> Result<EvdCheckReport> {
    let n = a.nrows();
    linalg::shape_check(a, n, n, "A")?;
    if probes.ncols() != n || probes.nrows() == 0 {
        return Err(Error::Shape(format!(
            "probe points must be k x {n}, got {:?}",
            probes.shape()
        )));
    }
    if linalg::max_abs_diff(&(a.transpose() * a), &DMatrix::identity(n, n)) > 1e-8 {
        return Err(Error::Precondition(
            "A must be orthogonal within 1e-8".into(),
        ));
    }
    dist.validate()?;
    if !dist.has_log_density_curvature() {
        return Err(Error::UnsupportedDistribution(format!(
            "{dist} has no usable second derivative of the log-density"
        )));
    }
    let mut out = Vec::with_capacity(probes.nrows());
    let mut all_scalar = true;
    for row in probes.row_iter() {
        let x = row.transpose();
        let y = a.transpose() * &x;
        let d: Vec<f64> = y
            .iter()
            .map(|&v| dist.log_density_second_derivative(v, LOG_DENSITY_SMOOTHING))
            .collect();
        let m = a * DMatrix::from_diagonal(&DVector::from_column_slice(&d)) * a.transpose();
        let mut offdiag = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    offdiag = offdiag.max(m[(i, j)].abs());
                }
            }
        }
        let mut spread = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                spread = spread.min((d[i] - d[j]).abs());
            }
        }
        let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi - lo > tolerance {
            all_scalar = false;
        }
        out.push(EvdProbe {
            point: x.iter().copied().collect(),
            offdiag,
            spread,
        });
    }
    let verdict = if all_scalar {
        EvdVerdict::DegenerateGaussian
    } else if linalg::is_signed_permutation(a, 1e-8) {
        EvdVerdict::SignedPermutation
    } else {
        EvdVerdict::IdentifiableStructure
    };
    Ok(EvdCheckReport {
        offdiag_residual: out.iter().map(|p| p.offdiag).fold(0.0, f64::max),
        eigenvalue_spread: out.iter().map(|p| p.spread).fold(f64::INFINITY, f64::min),
        verdict,
        probes: out,
    })
}
