use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::{SourceDistribution, SourceKind};
use crate::{linalg, rng};

const ENERGY_ROWS: usize = 500;
const ENERGY_PERMUTATIONS: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotationReport {
    pub n_vars: usize,
    pub n_samples: usize,
    #[serde(with = "crate::json::matrix")]
    pub rotation: DMatrix<f64>,
    pub orthogonal: bool,
    /// Mean log-density of the rotated data under the model `x = s`.
    pub log_likelihood_identity: f64,
    /// Mean log-density of the rotated data under the model `x = U s`.
    pub log_likelihood_rotated: f64,
    pub difference: f64,
    /// Energy distance between unrotated and rotated halves of the sample.
    pub energy_distance: f64,
    pub energy_p_value: f64,
    pub note: String,
}

fn gaussian_mean_log_density(x: &DMatrix<f64>, mixing: &DMatrix<f64>) -> Result<f64> {
    let n = x.ncols() as f64;
    let lu = mixing.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or_else(|| Error::Precondition("model matrix is singular".into()))?;
    let log_det = mixing.clone().lu().determinant().abs().ln();
    let s = x * inv.transpose();
    let sq = s.iter().map(|v| v * v).sum::<f64>() / x.nrows() as f64;
    Ok(-0.5 * sq - 0.5 * n * std::f64::consts::TAU.ln() - log_det)
}

/// V-statistic energy distance between two samples (rows are points).
pub fn energy_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let pts: Vec<Vec<f64>> = a
        .row_iter()
        .chain(b.row_iter())
        .map(|r| r.iter().copied().collect())
        .collect();
    let idx: Vec<usize> = (0..pts.len()).collect();
    let d = distance_matrix(&pts);
    energy_from(&d, &idx[..a.nrows()], &idx[a.nrows()..])
}

fn distance_matrix(pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    pts.iter()
        .map(|p| {
            pts.iter()
                .map(|q| {
                    p.iter()
                        .zip(q)
                        .map(|(u, v)| (u - v) * (u - v))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect()
}

fn energy_from(d: &[Vec<f64>], a: &[usize], b: &[usize]) -> f64 {
    let mean = |s: &[usize], t: &[usize]| {
        let mut acc = 0.0;
        for &i in s {
            for &j in t {
                acc += d[i][j];
            }
        }
        acc / (s.len() * t.len()) as f64
    };
    2.0 * mean(a, b) - mean(a, a) - mean(b, b)
}

/// White Gaussian sources seen through `rotation`: the likelihood cannot
/// tell the rotated model from the unrotated one when `rotation` is
/// orthogonal.
pub fn gaussian_rotation_demo_with(
    rotation: DMatrix<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<RotationReport> {
    let n = rotation.nrows();
    linalg::shape_check(&rotation, n, n, "rotation")?;
    if n < 2 || n_samples < 4 {
        return Err(Error::Precondition(
            "need at least 2 variables and 4 samples".into(),
        ));
    }
    let s = SourceDistribution::new(SourceKind::Gaussian).sample_matrix(
        n_samples,
        n,
        &mut rng::child(seed, 1),
    );
    let x = &s * rotation.transpose();
    let identity = DMatrix::identity(n, n);
    let ll_id = gaussian_mean_log_density(&x, &identity)?;
    let ll_rot = gaussian_mean_log_density(&x, &rotation)?;
    let orthogonal = linalg::max_abs_diff(&(rotation.transpose() * &rotation), &identity) < 1e-8;

    // unrotated first half against rotated second half: independent samples
    let half = (n_samples / 2).min(ENERGY_ROWS);
    let a = s.rows(0, half).into_owned();
    let b = s.rows(n_samples - half, half).into_owned() * rotation.transpose();
    let pts: Vec<Vec<f64>> = a
        .row_iter()
        .chain(b.row_iter())
        .map(|r| r.iter().copied().collect())
        .collect();
    let d = distance_matrix(&pts);
    let idx: Vec<usize> = (0..2 * half).collect();
    let observed = energy_from(&d, &idx[..half], &idx[half..]);
    let mut r = rng::child(seed, 2);
    let mut exceed = 0;
    let mut perm = idx.clone();
    for _ in 0..ENERGY_PERMUTATIONS {
        perm.shuffle(&mut r);
        if energy_from(&d, &perm[..half], &perm[half..]) >= observed {
            exceed += 1;
        }
    }
    let p = (1 + exceed) as f64 / (ENERGY_PERMUTATIONS + 1) as f64;
    let difference = ll_rot - ll_id;
    let note = if orthogonal {
        "orthogonal rotation: identical likelihood, the rotation is not identifiable".to_string()
    } else {
        "not a counterexample: the matrix is not orthogonal, so the density changes".to_string()
    };
    Ok(RotationReport {
        n_vars: n,
        n_samples,
        rotation,
        orthogonal,
        log_likelihood_identity: ll_id,
        log_likelihood_rotated: ll_rot,
        difference,
        energy_distance: observed,
        energy_p_value: p,
        note,
    })
}

/// Same with a random orthogonal matrix drawn from the seed.
pub fn gaussian_rotation_demo(
    n_vars: usize,
    n_samples: usize,
    seed: u64,
) -> Result<RotationReport> {
    if n_vars < 2 {
        return Err(Error::Precondition("need at least 2 variables".into()));
    }
    let u = linalg::random_orthogonal(n_vars, &mut rng::child(seed, 0));
    gaussian_rotation_demo_with(u, n_samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_exactly_zero() {
        let r = gaussian_rotation_demo_with(DMatrix::identity(3, 3), 500, 1).unwrap();
        assert_eq!(r.difference, 0.0);
    }

    #[test]
    fn random_rotation_is_invisible() {
        let r = gaussian_rotation_demo(2, 2000, 4).unwrap();
        assert!(r.orthogonal);
        assert!(r.difference.abs() < 1e-10);
    }

    #[test]
    fn scaling_is_visible() {
        let r = gaussian_rotation_demo_with(DMatrix::identity(2, 2) * 2.0, 1000, 4).unwrap();
        assert!(!r.orthogonal);
        assert!(r.difference.abs() > 0.1);
        assert!(r.note.contains("not a counterexample"));
    }

    #[test]
    fn energy_distance_zero_for_identical_samples() {
        let a = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 2.0, 0.5, -1.0, 0.3]);
        assert!(energy_distance(&a, &a).abs() < 1e-15);
        let b = a.add_scalar(5.0);
        assert!(energy_distance(&a, &b) > 1.0);
    }
}
