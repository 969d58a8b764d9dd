use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::MlpFunction;

pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Second derivatives use a stencil this many times wider than the
/// Jacobian step, to keep rounding error small.
const SECOND_STEP_FACTOR: f64 = 10.0;

/// A map `R^n -> R^n`.
pub trait VectorMap {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
}

impl VectorMap for MlpFunction {
    fn dim(&self) -> usize {
        MlpFunction::dim(self)
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        MlpFunction::eval(self, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "kebab-case")]
pub enum BuiltinMap {
    /// `x -> M x + b`.
    Affine {
        #[serde(with = "crate::json::matrix")]
        matrix: DMatrix<f64>,
        #[serde(with = "crate::json::vector")]
        offset: DVector<f64>,
    },
    /// Elementwise `tanh`.
    Tanh { dim: usize },
}

impl VectorMap for BuiltinMap {
    fn dim(&self) -> usize {
        match self {
            BuiltinMap::Affine { matrix, .. } => matrix.ncols(),
            BuiltinMap::Tanh { dim } => *dim,
        }
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            BuiltinMap::Affine { matrix, offset } => (matrix * DVector::from_column_slice(x)
                + offset)
                .iter()
                .copied()
                .collect(),
            BuiltinMap::Tanh { .. } => x.iter().map(|v| v.tanh()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsometryVerdict {
    OrthogonallyAffine,
    NotIsometric,
    IsometricButInconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    /// Max over probes of `max |J^T J - I|`.
    pub orthogonality_residual: f64,
    /// Max over probes and indices of `|J_i . J_j^k|`, where `J_j^k` is the
    /// derivative of Jacobian column `j` along `x_k`.
    pub second_derivative_residual: f64,
    /// Max of `|J_i . J_j^k + J_j . J_i^k|`.
    pub skew_identity_residual: f64,
    /// Max of `|J_i . J_j^k - J_i . J_k^j|`.
    pub symmetric_identity_residual: f64,
    pub verdict: IsometryVerdict,
    pub n_probes: usize,
}

fn eval_checked(f: &dyn VectorMap, x: &[f64]) -> Result<Vec<f64>> {
    let y = f.eval(x);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("map value at {x:?}")));
    }
    Ok(y)
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut p = x.to_vec();
    for &(k, d) in moves {
        p[k] += d;
    }
    p
}

/// Central-difference Jacobian, `jac[(i, j)] = d f_i / d x_j`.
fn jacobian(f: &dyn VectorMap, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let up = eval_checked(f, &shifted(x, &[(j, h)]))?;
        let dn = eval_checked(f, &shifted(x, &[(j, -h)]))?;
        for i in 0..n {
            jac[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `second[j][k][i] = d^2 f_i / d x_j d x_k` by the four-point stencil.
fn hessians(f: &dyn VectorMap, x: &[f64], h: f64) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = x.len();
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    for j in 0..n {
        for k in j..n {
            let pp = eval_checked(f, &shifted(x, &[(j, h), (k, h)]))?;
            let pm = eval_checked(f, &shifted(x, &[(j, h), (k, -h)]))?;
            let mp = eval_checked(f, &shifted(x, &[(j, -h), (k, h)]))?;
            let mm = eval_checked(f, &shifted(x, &[(j, -h), (k, -h)]))?;
            for i in 0..n {
                let v = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
                out[j][k][i] = v;
                out[k][j][i] = v;
            }
        }
    }
    Ok(out)
}

/// Finite-difference test of local isometry and of the second-derivative
/// identities that force an isometric map to be affine. Each row of
/// `probes` is one evaluation point.
pub fn isometry_check(
    f: &dyn VectorMap,
    probes: &DMatrix<f64>,
    fd_step: f64,
    tolerance: f64,
) -> Result<IsometryReport> {
    let n = f.dim();
    if !(fd_step > 0.0) {
        return Err(Error::Precondition("fd_step must be positive".into()));
    }
    if probes.ncols() != n || probes.nrows() == 0 {
        return Err(Error::Shape(format!(
            "probe points must be k x {n}, got {:?}",
            probes.shape()
        )));
    }
    let h2 = SECOND_STEP_FACTOR * fd_step;
    let (mut orth, mut second, mut skew, mut sym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut all_affine = true;
    for row in probes.row_iter() {
        let x: Vec<f64> = row.iter().copied().collect();
        let jac = jacobian(f, &x, fd_step)?;
        let gram = jac.transpose() * &jac - DMatrix::identity(n, n);
        let o = gram.amax();
        let hess = hessians(f, &x, h2)?;
        // t[i][j][k] = J_i . J_j^k, with J_j^k[m] = d^2 f_m / d x_j d x_k
        let t = |i: usize, j: usize, k: usize| -> f64 {
            (0..n).map(|m| jac[(m, i)] * hess[j][k][m]).sum()
        };
        let mut s = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = t(i, j, k);
                    s = s.max(v.abs());
                    skew = skew.max((v + t(j, i, k)).abs());
                    sym = sym.max((v - t(i, k, j)).abs());
                }
            }
        }
        if !(o < tolerance && s < tolerance) {
            all_affine = false;
        }
        orth = orth.max(o);
        second = second.max(s);
    }
    let verdict = if all_affine {
        IsometryVerdict::OrthogonallyAffine
    } else if orth >= tolerance {
        IsometryVerdict::NotIsometric
    } else {
        IsometryVerdict::IsometricButInconsistent
    };
    Ok(IsometryReport {
        orthogonality_residual: orth,
        second_derivative_residual: second,
        skew_identity_residual: skew,
        symmetric_identity_residual: sym,
        verdict,
        n_probes: probes.nrows(),
    })
}
