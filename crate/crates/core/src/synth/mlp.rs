//! Invertible feed-forward mixing functions.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Activation {
    LeakyRelu { slope: f64 },
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(&self, v: f64) -> f64 {
        match *self {
            Activation::LeakyRelu { slope } => {
                if v >= 0.0 {
                    v
                } else {
                    slope * v
                }
            }
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match *self {
            Activation::LeakyRelu { slope } => {
                if v >= 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Tanh => 1.0 - v.tanh().powi(2),
            Activation::Identity => 1.0,
        }
    }

    pub fn inverse(&self, y: f64) -> Result<f64> {
        match *self {
            Activation::LeakyRelu { slope } => {
                if slope <= 0.0 {
                    Err(Error::Precondition(
                        "leaky-relu with slope <= 0 is not invertible".into(),
                    ))
                } else if y >= 0.0 {
                    Ok(y)
                } else {
                    Ok(y / slope)
                }
            }
            Activation::Tanh => {
                if y.abs() >= 1.0 {
                    Err(Error::NonFinite(format!("atanh({y})")))
                } else {
                    Ok(y.atanh())
                }
            }
            Activation::Identity => Ok(y),
        }
    }
}

/// `x = W_L( act( ... act(W_1 s + b_1) ... )) + b_L`: every layer square,
/// activation between layers, final layer affine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpFunction {
    #[serde(with = "crate::json::matrices")]
    pub layer_weights: Vec<DMatrix<f64>>,
    #[serde(with = "crate::json::vectors")]
    pub layer_biases: Vec<DVector<f64>>,
    pub activation: Activation,
}

pub const DEFAULT_CONDITION_BOUND: f64 = 10.0;

impl MlpFunction {
    pub fn new(
        layer_weights: Vec<DMatrix<f64>>,
        layer_biases: Vec<DVector<f64>>,
        activation: Activation,
    ) -> Result<Self> {
        let f = Self {
            layer_weights,
            layer_biases,
            activation,
        };
        f.validate(f64::INFINITY)?;
        Ok(f)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            layer_weights: vec![DMatrix::identity(n, n)],
            layer_biases: vec![DVector::zeros(n)],
            activation: Activation::Identity,
        }
    }

    /// Random mixer with `n_layers` square layers, each with singular values
    /// drawn in `[1, cond_bound]` (then rescaled to unit RMS gain).
    pub fn random(
        n: usize,
        n_layers: usize,
        activation: Activation,
        cond_bound: f64,
        seed: u64,
    ) -> Result<Self> {
        if n_layers == 0 {
            return Err(Error::Precondition("mixer needs at least one layer".into()));
        }
        let mut r = rng::rng(seed);
        let mut weights = Vec::with_capacity(n_layers);
        let mut biases = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            weights.push(random_conditioned(n, cond_bound, &mut r));
            biases.push(DVector::from_fn(n, |_, _| {
                0.2 * (2.0 * r.random::<f64>() - 1.0)
            }));
        }
        let f = Self {
            layer_weights: weights,
            layer_biases: biases,
            activation,
        };
        f.validate(cond_bound)?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.layer_weights[0].nrows()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_weights.len()
    }

    /// Checks shapes, finiteness and per-layer condition numbers.
    pub fn validate(&self, cond_bound: f64) -> Result<()> {
        if self.layer_weights.is_empty() || self.layer_weights.len() != self.layer_biases.len() {
            return Err(Error::Shape(
                "weights and biases must be non-empty and paired".into(),
            ));
        }
        let n = self.layer_weights[0].nrows();
        for (l, (w, b)) in self
            .layer_weights
            .iter()
            .zip(&self.layer_biases)
            .enumerate()
        {
            linalg::shape_check(w, n, n, &format!("layer {l} weights"))?;
            if b.len() != n {
                return Err(Error::Shape(format!(
                    "layer {l} bias has length {}",
                    b.len()
                )));
            }
            if w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {l} parameters")));
            }
            let c = linalg::condition_number(w);
            if !(c <= cond_bound) {
                return Err(Error::Precondition(format!(
                    "layer {l} condition number {c:.3} exceeds bound {cond_bound}"
                )));
            }
        }
        Ok(())
    }

    pub fn forward(&self, s: &DVector<f64>) -> DVector<f64> {
        let last = self.n_layers() - 1;
        let mut h = s.clone();
        for (l, (w, b)) in self
            .layer_weights
            .iter()
            .zip(&self.layer_biases)
            .enumerate()
        {
            h = w * h + b;
            if l < last {
                h.apply(|v| *v = self.activation.apply(*v));
            }
        }
        h
    }

    pub fn eval(&self, s: &[f64]) -> Vec<f64> {
        self.forward(&DVector::from_column_slice(s))
            .iter()
            .copied()
            .collect()
    }

    /// Applies the map to every row.
    pub fn forward_rows(&self, s: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(s.nrows(), s.ncols());
        for i in 0..s.nrows() {
            let y = self.forward(&s.row(i).transpose());
            out.row_mut(i).copy_from(&y.transpose());
        }
        out
    }

    /// Layer-by-layer inverse: LU solve for each affine map, closed-form
    /// inverse for each activation.
    pub fn inverse(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let last = self.n_layers() - 1;
        let mut h = x.clone();
        for l in (0..self.n_layers()).rev() {
            if l < last {
                for v in h.iter_mut() {
                    *v = self.activation.inverse(*v)?;
                }
            }
            let rhs = &h - &self.layer_biases[l];
            h = self.layer_weights[l]
                .clone()
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Precondition(format!("layer {l} is singular")))?;
        }
        Ok(h)
    }
}

/// Square matrix `U diag(sigma) V^T` with singular values in `[1, bound]`,
/// normalized to unit RMS singular value.
pub fn random_conditioned<R: Rng + ?Sized>(n: usize, cond_bound: f64, rng: &mut R) -> DMatrix<f64> {
    let u = linalg::random_orthogonal(n, rng);
    let v = linalg::random_orthogonal(n, rng);
    let hi = cond_bound.max(1.0);
    let sv: Vec<f64> = (0..n)
        .map(|_| 1.0 + (hi - 1.0) * rng.random::<f64>())
        .collect();
    let rms = (sv.iter().map(|s| s * s).sum::<f64>() / n as f64).sqrt();
    let d = DMatrix::from_diagonal(&DVector::from_iterator(n, sv.iter().map(|s| s / rms)));
    u * d * v.transpose()
}
