//! Symmetric (ZCA) whitening from the eigendecomposition of the sample
//! covariance.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg;

/// Eigenvalues below this fraction of the largest one are treated as zero.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct WhiteningResult {
    pub whitened: Dataset,
    /// `V` such that `whitened = (x - mean) V^T`.
    pub transform: DMatrix<f64>,
    pub mean: DVector<f64>,
}

impl WhiteningResult {
    /// Applies the fitted transform to new rows.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        linalg::center_with(x, &self.mean) * self.transform.transpose()
    }
}

pub fn whiten(data: &Dataset) -> Result<WhiteningResult> {
    let (rows, cols) = (data.n_rows(), data.n_cols());
    if rows <= cols {
        return Err(Error::InsufficientData {
            needed: cols + 1,
            got: rows,
        });
    }
    let x = data.values();
    let mean = linalg::column_means(x);
    let cov = linalg::covariance(x);
    let eig = cov.symmetric_eigen();
    let max = eig.eigenvalues.max();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if !(l > EIGENVALUE_FLOOR * max) {
            return Err(Error::DegenerateData {
                eigenvalue: l,
                index: i,
            });
        }
    }
    let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let transform = &eig.eigenvectors * scale * eig.eigenvectors.transpose();
    let z = linalg::center_with(x, &mean) * transform.transpose();
    Ok(WhiteningResult {
        whitened: data.with_values(z)?,
        transform,
        mean,
    })
}
