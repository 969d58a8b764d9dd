use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::independence::{hsic_test, TestConfig, TestReport};
use crate::synth::{SourceDistribution, SourceKind};
use crate::{rng, stats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryConfig {
    pub rho: f64,
    /// Coefficient of the non-Gaussian contrast `x2 = b x1 + e`; `None`
    /// skips the contrast.
    pub contrast_coef: Option<f64>,
    pub test: TestConfig,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        Self {
            rho: 0.6,
            contrast_coef: Some(0.6),
            test: TestConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaplaceContrast {
    pub coef: f64,
    /// Residual of `x2` on `x1` against `x1`.
    pub forward: TestReport,
    /// Residual of `x1` on `x2` against `x2`.
    pub backward: TestReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub n_samples: usize,
    pub rho: f64,
    pub rho_hat: f64,
    pub coef_forward: f64,
    pub coef_backward: f64,
    pub residual_var_forward: f64,
    pub residual_var_backward: f64,
    /// Mean Gaussian log-likelihood per sample of `x1 -> x2` and `x2 -> x1`.
    pub log_likelihood_forward: f64,
    pub log_likelihood_backward: f64,
    pub log_likelihood_gap: f64,
    pub contrast: Option<LaplaceContrast>,
}

struct Fit {
    coef: f64,
    residuals: Vec<f64>,
    residual_var: f64,
}

/// Least squares of `y` on `x` (both centered).
fn regress(x: &[f64], y: &[f64]) -> Fit {
    let (mx, my) = (stats::mean(x), stats::mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let coef = sxy / sxx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my) - coef * (a - mx))
        .collect();
    let residual_var = residuals.iter().map(|r| r * r).sum::<f64>() / x.len() as f64;
    Fit {
        coef,
        residuals,
        residual_var,
    }
}

fn pop_var(x: &[f64]) -> f64 {
    let m = stats::mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

fn gaussian_ml(var: f64) -> f64 {
    -0.5 * (std::f64::consts::TAU * var).ln() - 0.5
}

/// Standardized Gaussian pair with correlation `rho`: both regressions fit
/// equally well. The optional contrast repeats the two regressions with
/// Laplace variables and tests residual independence.
pub fn bivariate_symmetry_demo(
    n_samples: usize,
    seed: u64,
    cfg: &SymmetryConfig,
) -> Result<SymmetryReport> {
    if n_samples < 20 {
        return Err(Error::InsufficientData {
            needed: 20,
            got: n_samples,
        });
    }
    if !(cfg.rho.abs() < 1.0) {
        return Err(Error::Precondition("|rho| must be below 1".into()));
    }
    let g = SourceDistribution::new(SourceKind::Gaussian);
    let z1 = g.sample_vec(n_samples, &mut rng::child(seed, 0));
    let z2 = g.sample_vec(n_samples, &mut rng::child(seed, 1));
    let x1 = stats::standardize(&z1)?;
    let raw: Vec<f64> = z1
        .iter()
        .zip(&z2)
        .map(|(a, b)| cfg.rho * a + (1.0 - cfg.rho * cfg.rho).sqrt() * b)
        .collect();
    let x2 = stats::standardize(&raw)?;
    let fwd = regress(&x1, &x2);
    let bwd = regress(&x2, &x1);
    let ll_f = gaussian_ml(pop_var(&x1)) + gaussian_ml(fwd.residual_var);
    let ll_b = gaussian_ml(pop_var(&x2)) + gaussian_ml(bwd.residual_var);

    let contrast = match cfg.contrast_coef {
        None => None,
        Some(b) => {
            let lap = SourceDistribution::new(SourceKind::Laplace);
            let c1 = lap.sample_vec(n_samples, &mut rng::child(seed, 2));
            let e = lap.sample_vec(n_samples, &mut rng::child(seed, 3));
            let c2: Vec<f64> = c1.iter().zip(&e).map(|(a, e)| b * a + e).collect();
            let f = regress(&c1, &c2);
            let r = regress(&c2, &c1);
            Some(LaplaceContrast {
                coef: b,
                forward: hsic_test(&f.residuals, &c1, &cfg.test)?,
                backward: hsic_test(&r.residuals, &c2, &cfg.test)?,
            })
        }
    };
    Ok(SymmetryReport {
        n_samples,
        rho: cfg.rho,
        rho_hat: stats::pearson(&x1, &x2).unwrap_or(0.0),
        coef_forward: fwd.coef,
        coef_backward: bwd.coef,
        residual_var_forward: fwd.residual_var,
        residual_var_backward: bwd.residual_var,
        log_likelihood_forward: ll_f,
        log_likelihood_backward: ll_b,
        log_likelihood_gap: (ll_f - ll_b).abs(),
        contrast,
    })
}
