use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceKind {
    Gaussian,
    Laplace,
    Uniform,
    GeneralizedGaussian { shape: f64 },
}

/// Zero-mean source law, normalized to unit variance and then multiplied by
/// `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceDistribution {
    #[serde(flatten)]
    pub kind: SourceKind,
    pub scale: f64,
}

impl SourceDistribution {
    pub fn new(kind: SourceKind) -> Self {
        Self { kind, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Precondition(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        if let SourceKind::GeneralizedGaussian { shape } = self.kind {
            if !(shape > 0.0 && shape.is_finite()) {
                return Err(Error::Precondition(format!(
                    "shape must be positive, got {shape}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_gaussian(&self) -> bool {
        match self.kind {
            SourceKind::Gaussian => true,
            SourceKind::GeneralizedGaussian { shape } => shape == 2.0,
            _ => false,
        }
    }

    /// Analytic excess kurtosis.
    pub fn excess_kurtosis(&self) -> f64 {
        match self.kind {
            SourceKind::Gaussian => 0.0,
            SourceKind::Laplace => 3.0,
            SourceKind::Uniform => -1.2,
            SourceKind::GeneralizedGaussian { shape: b } => {
                (ln_gamma(5.0 / b) + ln_gamma(1.0 / b) - 2.0 * ln_gamma(3.0 / b)).exp() - 3.0
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.scale * self.sample_unit(rng)
    }

    fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            SourceKind::Gaussian => rng.sample(StandardNormal),
            SourceKind::Laplace => {
                // inverse CDF, scale 1/sqrt(2) for unit variance
                let u: f64 = rng.random::<f64>() - 0.5;
                -u.signum() * (1.0 - 2.0 * u.abs()).ln() * std::f64::consts::FRAC_1_SQRT_2
            }
            SourceKind::Uniform => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
            SourceKind::GeneralizedGaussian { shape: b } => {
                let g = Gamma::new(1.0 / b, 1.0)
                    .expect("positive shape")
                    .sample(rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                // Var(|x|) with unit scale is Gamma(3/b) / Gamma(1/b)
                let var = (ln_gamma(3.0 / b) - ln_gamma(1.0 / b)).exp();
                sign * g.powf(1.0 / b) / var.sqrt()
            }
        }
    }

    pub fn sample_vec<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// `rows x cols` matrix of i.i.d. draws, filled column by column.
    pub fn sample_matrix<R: Rng + ?Sized>(
        &self,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| self.sample(rng))
    }

    /// Second derivative of the log-density at `s`.
    ///
    /// Laplace and generalized-Gaussian laws with shape != 2 are handled
    /// through the smooth surrogate `|s| ~ sqrt(s^2 + eps^2)`.
    pub fn log_density_second_derivative(&self, s: f64, eps: f64) -> f64 {
        let c = self.scale;
        let s = s / c;
        let unit = match self.kind {
            SourceKind::Gaussian => -1.0,
            SourceKind::Uniform => 0.0,
            SourceKind::Laplace => {
                // log p = -sqrt(2) |s|
                let r = s * s + eps * eps;
                -std::f64::consts::SQRT_2 * eps * eps / r.powf(1.5)
            }
            SourceKind::GeneralizedGaussian { shape: b } => {
                if b == 2.0 {
                    -1.0
                } else {
                    // log p = -(|s| / a)^b with a chosen for unit variance
                    let a = (ln_gamma(1.0 / b) - ln_gamma(3.0 / b)).exp().sqrt();
                    let r = s * s + eps * eps;
                    -b * r.powf(b / 2.0 - 2.0) * ((b - 1.0) * s * s + eps * eps) / a.powf(b)
                }
            }
        };
        unit / (c * c)
    }

    /// Whether the log-density has a usable (possibly smoothed) second
    /// derivative.
    pub fn has_log_density_curvature(&self) -> bool {
        !matches!(self.kind, SourceKind::Uniform)
    }
}

impl fmt::Display for SourceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SourceKind::Gaussian => write!(f, "gaussian")?,
            SourceKind::Laplace => write!(f, "laplace")?,
            SourceKind::Uniform => write!(f, "uniform")?,
            SourceKind::GeneralizedGaussian { shape } => write!(f, "gg:{shape}")?,
        }
        if self.scale != 1.0 {
            write!(f, "*{}", self.scale)?;
        }
        Ok(())
    }
}

impl FromStr for SourceDistribution {
    type Err = Error;

    /// `gaussian`, `laplace`, `uniform`, `gg:<shape>`, optionally followed by
    /// `*<scale>`.
    fn from_str(s: &str) -> Result<Self> {
        let (body, scale) = match s.split_once('*') {
            Some((b, sc)) => (
                b,
                sc.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad scale in `{s}`")))?,
            ),
            None => (s, 1.0),
        };
        let kind = match body.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => SourceKind::Gaussian,
            "laplace" => SourceKind::Laplace,
            "uniform" => SourceKind::Uniform,
            other => {
                let shape = other
                    .strip_prefix("gg:")
                    .or_else(|| other.strip_prefix("generalized-gaussian:"))
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown distribution `{s}`")))?;
                SourceKind::GeneralizedGaussian { shape }
            }
        };
        let d = Self { kind, scale };
        d.validate()?;
        Ok(d)
    }
}
