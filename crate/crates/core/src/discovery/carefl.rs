use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{canonical, CausalVerdict, Direction, Method};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::synth::TanhNet;
use crate::{rng, stats};

pub const MIN_CAREFL_ROWS: usize = 500;
/// Minimum rows on each side of the train/test split.
pub const MIN_SPLIT_ROWS: usize = 50;
/// Held-out log-likelihood gap (nats per sample) required for a verdict.
pub const DEFAULT_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BaseDensity {
    #[default]
    Laplace,
    Gaussian,
}

impl BaseDensity {
    fn log_pdf(self, z: f64) -> f64 {
        match self {
            BaseDensity::Laplace => -std::f64::consts::LN_2 - z.abs(),
            BaseDensity::Gaussian => -0.5 * (std::f64::consts::TAU).ln() - 0.5 * z * z,
        }
    }

    /// `d log p / dz`.
    fn score(self, z: f64) -> f64 {
        match self {
            BaseDensity::Laplace => -z.signum(),
            BaseDensity::Gaussian => -z,
        }
    }

    /// Maximum-likelihood location and log-scale of a sample.
    fn fit(self, x: &[f64]) -> (f64, f64) {
        match self {
            BaseDensity::Laplace => {
                let m = stats::median(x);
                let b = x.iter().map(|v| (v - m).abs()).sum::<f64>() / x.len() as f64;
                (m, b.max(1e-12).ln())
            }
            BaseDensity::Gaussian => {
                let m = stats::mean(x);
                let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64;
                (m, 0.5 * v.max(1e-24).ln())
            }
        }
    }
}

impl std::fmt::Display for BaseDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BaseDensity::Laplace => "laplace",
            BaseDensity::Gaussian => "gaussian",
        })
    }
}

impl std::str::FromStr for BaseDensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace" => Ok(BaseDensity::Laplace),
            "gaussian" => Ok(BaseDensity::Gaussian),
            other => Err(Error::Parse(format!(
                "unknown base density '{other}' (laplace|gaussian)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub hidden: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub base: BaseDensity,
    pub margin: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            hidden: 8,
            iterations: 1000,
            learning_rate: 0.01,
            weight_decay: 1e-4,
            base: BaseDensity::Laplace,
            margin: DEFAULT_MARGIN,
        }
    }
}

/// Two-variable affine autoregressive flow for `cause -> effect`:
/// the cause is an affine transform of a base variable, and
/// `effect = exp(alpha(cause)) z + beta(cause)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFlow {
    pub root_loc: f64,
    pub root_log_scale: f64,
    pub alpha: TanhNet,
    pub beta: TanhNet,
    pub base: BaseDensity,
}

impl AffineFlow {
    pub fn n_params(&self) -> usize {
        self.alpha.n_params() + self.beta.n_params()
    }

    /// Parameters of `alpha` followed by those of `beta`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.alpha.params();
        p.extend(self.beta.params());
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let k = self.alpha.n_params();
        self.alpha.set_params(&p[..k]);
        self.beta.set_params(&p[k..]);
    }

    pub fn log_density(&self, cause: f64, effect: f64) -> f64 {
        let zc = (cause - self.root_loc) * (-self.root_log_scale).exp();
        let a = self.alpha.eval(cause);
        let z = (effect - self.beta.eval(cause)) * (-a).exp();
        self.base.log_pdf(zc) - self.root_log_scale + self.base.log_pdf(z) - a
    }

    pub fn mean_log_likelihood(&self, cause: &[f64], effect: &[f64]) -> f64 {
        cause
            .iter()
            .zip(effect)
            .map(|(&c, &e)| self.log_density(c, e))
            .sum::<f64>()
            / cause.len() as f64
    }

    /// Mean log-likelihood and its gradient with respect to `params()`.
    pub fn mean_log_likelihood_grad(&self, cause: &[f64], effect: &[f64]) -> (f64, Vec<f64>) {
        let k = self.alpha.n_params();
        let mut grad = vec![0.0; self.n_params()];
        let mut total = 0.0;
        let (ga, gb) = grad.split_at_mut(k);
        for (&c, &e) in cause.iter().zip(effect) {
            total += self.log_density(c, e);
            let a = self.alpha.eval(c);
            let inv = (-a).exp();
            let z = (e - self.beta.eval(c)) * inv;
            let psi = self.base.score(z);
            self.alpha.accumulate_grad(c, -psi * z - 1.0, ga);
            self.beta.accumulate_grad(c, -psi * inv, gb);
        }
        let n = cause.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (total / n, grad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowFit {
    pub flow: AffineFlow,
    pub train_log_likelihood: f64,
    pub test_log_likelihood: f64,
}

fn decay_mask(net: &TanhNet) -> Vec<f64> {
    let m = net.width();
    let mut v = vec![1.0; m];
    v.extend(vec![0.0; m]);
    v.extend(vec![1.0; m]);
    v.push(0.0);
    v
}

/// Maximum likelihood by full-batch Adam.
fn fit_flow(
    cause: (&[f64], &[f64]),
    effect: (&[f64], &[f64]),
    cfg: &FlowConfig,
    seed: u64,
) -> Result<FlowFit> {
    let (root_loc, root_log_scale) = cfg.base.fit(cause.0);
    let mut r = rng::rng(seed);
    let mut flow = AffineFlow {
        root_loc,
        root_log_scale,
        alpha: TanhNet::random(cfg.hidden, 1.0, 0.1, &mut r),
        beta: TanhNet::random(cfg.hidden, 1.0, 0.1, &mut r),
        base: cfg.base,
    };
    let mut mask = decay_mask(&flow.alpha);
    mask.extend(decay_mask(&flow.beta));
    let mut theta = flow.params();
    let (mut m, mut v) = (vec![0.0; theta.len()], vec![0.0; theta.len()]);
    let (b1, b2, eps) = (0.9, 0.999, 1e-8);
    for it in 0..cfg.iterations {
        let (ll, g) = flow.mean_log_likelihood_grad(cause.0, effect.0);
        if !ll.is_finite() {
            return Err(Error::TrainingDiverged { epoch: it });
        }
        let t = (it + 1) as i32;
        for k in 0..theta.len() {
            let grad = -g[k] + cfg.weight_decay * mask[k] * theta[k];
            m[k] = b1 * m[k] + (1.0 - b1) * grad;
            v[k] = b2 * v[k] + (1.0 - b2) * grad * grad;
            let mh = m[k] / (1.0 - b1.powi(t));
            let vh = v[k] / (1.0 - b2.powi(t));
            theta[k] -= cfg.learning_rate * mh / (vh.sqrt() + eps);
        }
        flow.set_params(&theta);
    }
    let train = flow.mean_log_likelihood(cause.0, effect.0);
    let test = flow.mean_log_likelihood(cause.1, effect.1);
    if !train.is_finite() || !test.is_finite() {
        return Err(Error::TrainingDiverged {
            epoch: cfg.iterations,
        });
    }
    Ok(FlowFit {
        flow,
        train_log_likelihood: train,
        test_log_likelihood: test,
    })
}

/// Fits the affine flow in both directions and prefers the one with the
/// higher held-out log-likelihood, if it wins by at least `cfg.margin`.
pub fn discover_carefl(
    data: &Dataset,
    cfg: &FlowConfig,
    split_ratio: f64,
    seed: u64,
) -> Result<CausalVerdict> {
    super::check_pair(data)?;
    let n = data.n_rows();
    if n < MIN_CAREFL_ROWS {
        return Err(Error::InsufficientData {
            needed: MIN_CAREFL_ROWS,
            got: n,
        });
    }
    let n_train = (split_ratio * n as f64).floor() as usize;
    if !(split_ratio > 0.0 && split_ratio < 1.0)
        || n_train < MIN_SPLIT_ROWS
        || n - n_train < MIN_SPLIT_ROWS
    {
        return Err(Error::Precondition(format!(
            "split ratio {split_ratio} leaves fewer than {MIN_SPLIT_ROWS} rows on one side"
        )));
    }
    if cfg.hidden == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::Precondition(
            "flow needs hidden units and a positive learning rate".into(),
        ));
    }
    canonical(data, |d| {
        let x1 = stats::standardize(&d.column(0))?;
        let x2 = stats::standardize(&d.column(1))?;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng::child(seed, 0));
        let pick = |v: &[f64], range: &[usize]| range.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let (tr, te) = idx.split_at(n_train);
        let (a_tr, a_te, b_tr, b_te) = (pick(&x1, tr), pick(&x1, te), pick(&x2, tr), pick(&x2, te));
        let init = rng::derive(seed, 1);
        let fwd = fit_flow((&a_tr, &a_te), (&b_tr, &b_te), cfg, init)?;
        let bwd = fit_flow((&b_tr, &b_te), (&a_tr, &a_te), cfg, init)?;
        let gap = fwd.test_log_likelihood - bwd.test_log_likelihood;
        let direction = if gap > cfg.margin {
            Direction::X1ToX2
        } else if gap < -cfg.margin {
            Direction::X2ToX1
        } else {
            Direction::Inconclusive
        };
        let note = if direction == Direction::Inconclusive {
            format!(
                "held-out log-likelihood gap {gap:.4} is within the margin {}",
                cfg.margin
            )
        } else {
            format!("held-out log-likelihood gap {gap:.4} nats per sample")
        };
        Ok(CausalVerdict {
            direction,
            method: Method::Carefl,
            tests: Vec::new(),
            log_likelihoods: Some((fwd.test_log_likelihood, bwd.test_log_likelihood)),
            confidence_note: note,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut r = rng::rng(3);
        let flow = AffineFlow {
            root_loc: 0.1,
            root_log_scale: -0.2,
            alpha: TanhNet::random(3, 1.0, 0.5, &mut r),
            beta: TanhNet::random(3, 1.0, 0.5, &mut r),
            base: BaseDensity::Gaussian,
        };
        let c = [0.3, -1.2, 0.8, 2.0];
        let e = [1.0, 0.4, -0.7, 0.2];
        let (_, g) = flow.mean_log_likelihood_grad(&c, &e);
        let p = flow.params();
        for k in 0..p.len() {
            let mut q = p.clone();
            let mut f = flow.clone();
            q[k] += 1e-5;
            f.set_params(&q);
            let up = f.mean_log_likelihood(&c, &e);
            q[k] -= 2e-5;
            f.set_params(&q);
            let down = f.mean_log_likelihood(&c, &e);
            let fd = (up - down) / 2e-5;
            assert!(
                (fd - g[k]).abs() <= 1e-4 * fd.abs().max(1e-3),
                "param {k}: {fd} vs {}",
                g[k]
            );
        }
    }

    #[test]
    fn laplace_root_fit_is_ml() {
        let (m, s) = BaseDensity::Laplace.fit(&[0.0, 1.0, 2.0, 3.0, 10.0]);
        assert_eq!(m, 2.0);
        assert!((s - (12.0f64 / 5.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn split_checks() {
        let d = Dataset::from_columns(&[
            (0..600).map(|i| i as f64).collect(),
            (0..600).map(|i| (i * 7 % 13) as f64).collect(),
        ])
        .unwrap();
        assert!(discover_carefl(&d, &FlowConfig::default(), 0.99, 0).is_err());
    }
}
