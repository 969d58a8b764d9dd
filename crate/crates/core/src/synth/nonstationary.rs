//! Piecewise-stationary sources: within segment `tau`, component `i` has
//! log-density `b(s) + lambda[tau, i] * q(s)` with `q(s) = -s^2`, i.e. it is
//! Gaussian with variance `1 / (2 lambda[tau, i])`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::MlpFunction;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_LAMBDA_RANGE: (f64, f64) = (0.3, 3.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SufficientStatistic {
    #[default]
    NegSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonstationarySpec {
    pub n_segments: usize,
    pub samples_per_segment: usize,
    /// `n_segments x n_vars` modulation parameters, all positive.
    #[serde(with = "crate::json::matrix")]
    pub lambda: DMatrix<f64>,
    pub sufficient_statistic: SufficientStatistic,
}

impl NonstationarySpec {
    /// `lambda` drawn uniformly from `range`.
    pub fn random(
        n_vars: usize,
        n_segments: usize,
        samples_per_segment: usize,
        range: (f64, f64),
        seed: u64,
    ) -> Self {
        let mut r = rng::child(seed, 10);
        let lambda = DMatrix::from_fn(n_segments, n_vars, |_, _| {
            range.0 + (range.1 - range.0) * r.random::<f64>()
        });
        Self {
            n_segments,
            samples_per_segment,
            lambda,
            sufficient_statistic: SufficientStatistic::NegSquare,
        }
    }

    /// Every segment shares the same `lambda`: the stationary control.
    pub fn constant(
        n_vars: usize,
        n_segments: usize,
        samples_per_segment: usize,
        value: f64,
    ) -> Self {
        Self {
            n_segments,
            samples_per_segment,
            lambda: DMatrix::from_element(n_segments, n_vars, value),
            sufficient_statistic: SufficientStatistic::NegSquare,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.lambda.ncols()
    }

    /// `alpha[tau - 1, i] = lambda[tau, i] - lambda[0, i]` for `tau >= 1`.
    pub fn alpha(&self) -> DMatrix<f64> {
        let t = self.lambda.nrows();
        DMatrix::from_fn(t.saturating_sub(1), self.n_vars(), |r, c| {
            self.lambda[(r + 1, c)] - self.lambda[(0, c)]
        })
    }

    pub fn alpha_rank(&self) -> usize {
        let a = self.alpha();
        if a.nrows() == 0 {
            return 0;
        }
        let sv = a.singular_values();
        let tol = 1e-9 * sv.max().max(f64::MIN_POSITIVE);
        sv.iter().filter(|&&s| s > tol).count()
    }

    /// Validates the spec and returns identifiability warnings.
    pub fn check(&self) -> Result<Vec<String>> {
        if self.n_segments < 1 || self.lambda.nrows() != self.n_segments {
            return Err(Error::Shape(format!(
                "lambda has {} rows for {} segments",
                self.lambda.nrows(),
                self.n_segments
            )));
        }
        if self.samples_per_segment < 1 {
            return Err(Error::Precondition(
                "samples_per_segment must be positive".into(),
            ));
        }
        if self.lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Precondition(
                "all lambda entries must be positive".into(),
            ));
        }
        let mut warnings = Vec::new();
        let n = self.n_vars();
        if self.n_segments == 1 {
            warnings.push("stationary: model unidentifiable (Darmois)".to_string());
        } else if self.n_segments - 1 < n {
            warnings.push(format!(
                "only {} segment contrasts for {n} components: rank condition cannot hold",
                self.n_segments - 1
            ));
        } else {
            let rank = self.alpha_rank();
            if rank < n {
                warnings.push(format!(
                    "modulation matrix has rank {rank} < {n}: components not identifiable"
                ));
            }
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone)]
pub struct NonstationaryData {
    pub data: Dataset,
    /// Ground-truth sources, rows aligned with `data`.
    pub sources: DMatrix<f64>,
    pub warnings: Vec<String>,
}

pub fn gen_nonstationary_nica(
    n_vars: usize,
    spec: &NonstationarySpec,
    mixer: &MlpFunction,
    seed: u64,
) -> Result<NonstationaryData> {
    if spec.n_vars() != n_vars || mixer.dim() != n_vars {
        return Err(Error::Shape(format!(
            "n_vars {n_vars}, lambda has {} columns, mixer dimension {}",
            spec.n_vars(),
            mixer.dim()
        )));
    }
    let warnings = spec.check()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let rows = spec.n_segments * spec.samples_per_segment;
    let mut r = rng::child(seed, 1);
    let mut labels = Vec::with_capacity(rows);
    let mut s = DMatrix::zeros(rows, n_vars);
    for tau in 0..spec.n_segments {
        let sd: Vec<f64> = (0..n_vars)
            .map(|i| (0.5 / spec.lambda[(tau, i)]).sqrt())
            .collect();
        for k in 0..spec.samples_per_segment {
            let row = tau * spec.samples_per_segment + k;
            for i in 0..n_vars {
                let z: f64 = r.sample(StandardNormal);
                s[(row, i)] = sd[i] * z;
            }
            labels.push(tau);
        }
    }
    let x = mixer.forward_rows(&s);
    let data = Dataset::new(x)?.with_segments(labels)?;
    Ok(NonstationaryData {
        data,
        sources: s,
        warnings,
    })
}
