//! Seeded generators for the data-generating processes the estimators are
//! checked against. Every generator is a pure function of its parameters and
//! seed.

mod darmois;
mod distribution;
mod mlp;
mod nonstationary;
mod pairs;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use darmois::{darmois_bandwidth, darmois_construct, DARMOIS_MIN_ROWS};
pub use distribution::{SourceDistribution, SourceKind};
pub use mlp::{random_conditioned, Activation, MlpFunction, DEFAULT_CONDITION_BOUND};
pub use nonstationary::{
    gen_nonstationary_nica, NonstationaryData, NonstationarySpec, SufficientStatistic,
    DEFAULT_LAMBDA_RANGE,
};
pub use pairs::{
    gen_anm, gen_carefl, gen_nonsens_pair, gen_pnl, NonsensPair, PairData, PairMechanism,
    PairOptions, SinusoidMechanism, SoftplusPostMap, TanhNet, MIN_PAIR_ROWS,
};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lingam::{self, SemModel};
use crate::{linalg, rng, stats};

/// Square invertible mixing matrix with optional ground-truth sources.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearMixingModel {
    #[serde(with = "crate::json::matrix")]
    pub mixing: DMatrix<f64>,
    #[serde(skip)]
    pub sources: Option<DMatrix<f64>>,
    /// Set when the sources are Gaussian, so the mixing cannot be recovered.
    pub unidentifiable_by_design: bool,
}

impl LinearMixingModel {
    pub fn new(
        mixing: DMatrix<f64>,
        sources: Option<DMatrix<f64>>,
        cond_bound: f64,
    ) -> Result<Self> {
        if !mixing.is_square() {
            return Err(Error::Shape(format!(
                "mixing must be square, got {:?}",
                mixing.shape()
            )));
        }
        let c = linalg::condition_number(&mixing);
        if !(c <= cond_bound) {
            return Err(Error::Precondition(format!(
                "mixing condition number {c:.3e} exceeds bound {cond_bound}"
            )));
        }
        Ok(Self {
            mixing,
            sources,
            unidentifiable_by_design: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearIcaOptions {
    pub identity_mixing: bool,
    pub cond_bound: f64,
    /// Standard deviation of additive Gaussian sensor noise. Estimation under
    /// noise is not supported; this only perturbs the observations.
    pub noise_std: f64,
}

impl Default for LinearIcaOptions {
    fn default() -> Self {
        Self {
            identity_mixing: false,
            cond_bound: DEFAULT_CONDITION_BOUND,
            noise_std: 0.0,
        }
    }
}

/// `x = A s` with i.i.d. unit-variance sources and a random mixing matrix of
/// bounded condition number.
pub fn gen_linear_ica(
    n_vars: usize,
    n_samples: usize,
    dist: SourceDistribution,
    seed: u64,
    opts: LinearIcaOptions,
) -> Result<(Dataset, LinearMixingModel)> {
    if n_vars < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 variables, got {n_vars}"
        )));
    }
    if n_samples < 10 * n_vars {
        return Err(Error::InsufficientData {
            needed: 10 * n_vars,
            got: n_samples,
        });
    }
    dist.validate()?;
    let s = dist.sample_matrix(n_samples, n_vars, &mut rng::child(seed, 1));
    let a = if opts.identity_mixing {
        DMatrix::identity(n_vars, n_vars)
    } else {
        random_conditioned(n_vars, opts.cond_bound, &mut rng::child(seed, 0))
    };
    mix(s, a, dist.is_gaussian(), seed, opts)
}

fn mix(
    s: DMatrix<f64>,
    a: DMatrix<f64>,
    gaussian: bool,
    seed: u64,
    opts: LinearIcaOptions,
) -> Result<(Dataset, LinearMixingModel)> {
    let mut x = &s * a.transpose();
    if opts.noise_std > 0.0 {
        let noise = SourceDistribution::new(SourceKind::Gaussian).with_scale(opts.noise_std);
        x += noise.sample_matrix(x.nrows(), x.ncols(), &mut rng::child(seed, 2));
    }
    let mut model = LinearMixingModel::new(a, Some(s), opts.cond_bound.max(1.0) + 1e-9)?;
    model.unidentifiable_by_design = gaussian;
    if gaussian {
        log::warn!("gaussian sources: mixing is unidentifiable by design");
    }
    Ok((Dataset::new(x)?, model))
}

/// Four-signal blind-separation demo: sinusoid, square wave, sawtooth and
/// Laplace noise, each standardized, mixed by a random well-conditioned
/// matrix.
pub fn gen_signals(
    n_samples: usize,
    seed: u64,
    opts: LinearIcaOptions,
) -> Result<(Dataset, LinearMixingModel)> {
    if n_samples < 40 {
        return Err(Error::InsufficientData {
            needed: 40,
            got: n_samples,
        });
    }
    let mut r = rng::child(seed, 1);
    let tau = std::f64::consts::TAU;
    let mut freq = || 3.0 + 27.0 * r.random::<f64>();
    let (f1, f2, f3) = (freq(), freq(), freq());
    let mut r = rng::child(seed, 3);
    let (p1, p2, p3): (f64, f64, f64) = (r.random(), r.random(), r.random());
    let t = |i: usize| i as f64 / n_samples as f64;
    let sine: Vec<f64> = (0..n_samples)
        .map(|i| (tau * (f1 * t(i) + p1)).sin())
        .collect();
    let square: Vec<f64> = (0..n_samples)
        .map(|i| {
            if (tau * (f2 * t(i) + p2)).sin() >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let saw: Vec<f64> = (0..n_samples)
        .map(|i| {
            let u = f3 * t(i) + p3;
            2.0 * (u - u.floor()) - 1.0
        })
        .collect();
    let noise = SourceDistribution::new(SourceKind::Laplace)
        .sample_vec(n_samples, &mut rng::child(seed, 4));
    let cols: Vec<Vec<f64>> = [sine, square, saw, noise]
        .iter()
        .map(|c| stats::standardize(c))
        .collect::<Result<_>>()?;
    let s = DMatrix::from_fn(n_samples, 4, |i, j| cols[j][i]);
    let a = if opts.identity_mixing {
        DMatrix::identity(4, 4)
    } else {
        random_conditioned(4, opts.cond_bound, &mut rng::child(seed, 0))
    };
    mix(s, a, false, seed, opts)
}

/// Random acyclic linear SEM `x = B x + e`.
///
/// `B` is strictly lower triangular under a hidden random permutation; each
/// possible edge is present with probability `edge_prob` and has magnitude
/// uniform in `[0.3, 0.9]` with random sign.
pub fn gen_lingam(
    n_vars: usize,
    edge_prob: f64,
    noise: SourceDistribution,
    n_samples: usize,
    seed: u64,
) -> Result<(Dataset, SemModel)> {
    if n_vars < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 variables, got {n_vars}"
        )));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Precondition(format!(
            "edge probability {edge_prob} not in [0, 1]"
        )));
    }
    let mut r = rng::child(seed, 0);
    let mut order: Vec<usize> = (0..n_vars).collect();
    order.shuffle(&mut r);
    let mut b = DMatrix::zeros(n_vars, n_vars);
    for hi in 1..n_vars {
        for lo in 0..hi {
            // draw every candidate so the structure stream does not depend on edge_prob
            let present = r.random::<f64>() < edge_prob;
            let mag = 0.3 + 0.6 * r.random::<f64>();
            let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
            if present {
                b[(order[hi], order[lo])] = sign * mag;
            }
        }
    }
    gen_lingam_with_b(b, noise, n_samples, seed)
}

/// Samples `x = (I - B)^{-1} e` for a given acyclic `B`.
pub fn gen_lingam_with_b(
    b: DMatrix<f64>,
    noise: SourceDistribution,
    n_samples: usize,
    seed: u64,
) -> Result<(Dataset, SemModel)> {
    let n = b.nrows();
    linalg::shape_check(&b, n, n, "B")?;
    noise.validate()?;
    let order = lingam::causal_order(&b, 1e-12)?;
    let e = noise.sample_matrix(n_samples, n, &mut rng::child(seed, 1));
    let inv = (DMatrix::identity(n, n) - &b)
        .try_inverse()
        .ok_or_else(|| Error::Precondition("I - B is singular".into()))?;
    let x = &e * inv.transpose();
    let kurt = e
        .column_iter()
        .map(|c| stats::excess_kurtosis(c.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let model = SemModel {
        b,
        causal_order: order,
        disturbance_kurtosis: kurt,
        pruned: true,
    };
    Ok((Dataset::new(x)?, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_mixing_returns_sources() {
        let dist = SourceDistribution::new(SourceKind::Laplace);
        let opts = LinearIcaOptions {
            identity_mixing: true,
            ..Default::default()
        };
        let (d, m) = gen_linear_ica(3, 100, dist, 5, opts).unwrap();
        assert_eq!(d.values(), m.sources.as_ref().unwrap());
    }

    #[test]
    fn gaussian_is_flagged() {
        let (_, m) = gen_linear_ica(
            2,
            100,
            SourceDistribution::new(SourceKind::Gaussian),
            1,
            Default::default(),
        )
        .unwrap();
        assert!(m.unidentifiable_by_design);
        let (_, m) = gen_linear_ica(
            2,
            100,
            SourceDistribution::new(SourceKind::Uniform),
            1,
            Default::default(),
        )
        .unwrap();
        assert!(!m.unidentifiable_by_design);
    }

    #[test]
    fn linear_ica_preconditions() {
        let d = SourceDistribution::new(SourceKind::Laplace);
        assert!(gen_linear_ica(1, 100, d, 0, Default::default()).is_err());
        assert!(gen_linear_ica(4, 39, d, 0, Default::default()).is_err());
    }

    #[test]
    fn mixing_condition_bounded() {
        for seed in 0..20 {
            let (_, m) = gen_linear_ica(
                4,
                40,
                SourceDistribution::new(SourceKind::Laplace),
                seed,
                Default::default(),
            )
            .unwrap();
            assert!(linalg::condition_number(&m.mixing) <= 10.0 + 1e-9);
        }
    }

    #[test]
    fn generators_are_bit_deterministic() {
        let d = SourceDistribution::new(SourceKind::Laplace);
        let a = gen_lingam(4, 0.5, d, 200, 17).unwrap();
        let b = gen_lingam(4, 0.5, d, 200, 17).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.b, b.1.b);
        let c = gen_signals(500, 3, Default::default()).unwrap();
        let e = gen_signals(500, 3, Default::default()).unwrap();
        assert_eq!(c.0, e.0);
    }

    #[test]
    fn lingam_without_edges_is_noise() {
        let d = SourceDistribution::new(SourceKind::Laplace);
        let (data, sem) = gen_lingam(3, 0.0, d, 100, 4).unwrap();
        assert!(sem.b.iter().all(|&v| v == 0.0));
        let e = d.sample_matrix(100, 3, &mut rng::child(4, 1));
        assert!(linalg::max_abs_diff(data.values(), &e) < 1e-15);
    }

    #[test]
    fn lingam_structure_is_acyclic_with_valid_coefficients() {
        let d = SourceDistribution::new(SourceKind::Uniform);
        for seed in 0..30 {
            let (_, sem) = gen_lingam(6, 0.6, d, 20, seed).unwrap();
            let order = lingam::causal_order(&sem.b, 1e-12).unwrap();
            let p = linalg::permute_symmetric(&sem.b, &order);
            for i in 0..6 {
                for j in i..6 {
                    assert_eq!(p[(i, j)], 0.0);
                }
            }
            for &v in sem.b.iter().filter(|v| **v != 0.0) {
                assert!((0.3..=0.9).contains(&v.abs()));
            }
            let ib = DMatrix::identity(6, 6) - &sem.b;
            assert!(ib.determinant().abs() > 0.5);
        }
    }

    #[test]
    fn lingam_regression_recovers_coefficient() {
        // ordinary least squares oracle for x2 = 0.8 x1 + e2
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.8, 0.0]);
        let (d, _) =
            gen_lingam_with_b(b, SourceDistribution::new(SourceKind::Laplace), 10_000, 3).unwrap();
        let (x1, x2) = (d.column(0), d.column(1));
        let (m1, m2) = (stats::mean(&x1), stats::mean(&x2));
        let sxy: f64 = x1.iter().zip(&x2).map(|(a, b)| (a - m1) * (b - m2)).sum();
        let sxx: f64 = x1.iter().map(|a| (a - m1).powi(2)).sum();
        assert!((sxy / sxx - 0.8).abs() < 0.05);
    }

    #[test]
    fn cyclic_b_is_rejected() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        assert!(gen_lingam_with_b(b, SourceDistribution::new(SourceKind::Laplace), 10, 0).is_err());
    }
}
