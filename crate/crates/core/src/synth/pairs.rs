//! Bivariate cause-effect generators: additive noise, post-nonlinear, affine
//! autoregressive (heteroscedastic) and segment-modulated nonlinear SEMs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    gen_nonstationary_nica, Activation, MlpFunction, NonstationarySpec, SourceDistribution,
    SourceKind,
};
use crate::data::Dataset;
use crate::discovery::Direction;
use crate::error::{Error, Result};
use crate::{rng, stats};

pub const MIN_PAIR_ROWS: usize = 100;

/// `f(x) = sum_k a_k sin(w_k x + phi_k) + c x^3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidMechanism {
    pub amplitudes: [f64; 3],
    pub frequencies: [f64; 3],
    pub phases: [f64; 3],
    pub cubic: f64,
}

impl SinusoidMechanism {
    pub fn zero() -> Self {
        Self {
            amplitudes: [0.0; 3],
            frequencies: [1.0; 3],
            phases: [0.0; 3],
            cubic: 0.0,
        }
    }

    fn random<R: Rng + ?Sized>(r: &mut R) -> Self {
        let mut m = Self::zero();
        for k in 0..3 {
            m.amplitudes[k] = 0.5 + r.random::<f64>();
            m.frequencies[k] = 0.5 + 1.5 * r.random::<f64>();
            m.phases[k] = std::f64::consts::TAU * r.random::<f64>();
        }
        let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
        m.cubic = sign * (0.05 + 0.1 * r.random::<f64>());
        m
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut y = self.cubic * x * x * x;
        for k in 0..3 {
            y += self.amplitudes[k] * (self.frequencies[k] * x + self.phases[k]).sin();
        }
        y
    }
}

/// Strictly increasing post-map `g(u) = slope u + gain softplus(k (u - shift))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftplusPostMap {
    pub slope: f64,
    pub gain: f64,
    pub sharpness: f64,
    pub shift: f64,
}

impl SoftplusPostMap {
    pub fn identity() -> Self {
        Self {
            slope: 1.0,
            gain: 0.0,
            sharpness: 1.0,
            shift: 0.0,
        }
    }

    fn random<R: Rng + ?Sized>(r: &mut R) -> Self {
        Self {
            slope: 0.2 + 0.3 * r.random::<f64>(),
            gain: 0.5 + r.random::<f64>(),
            sharpness: 0.5 + 1.5 * r.random::<f64>(),
            shift: r.random::<f64>() - 0.5,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.slope * u + self.gain * softplus(self.sharpness * (u - self.shift))
    }
}

pub(crate) fn softplus(v: f64) -> f64 {
    if v > 30.0 {
        v
    } else {
        v.exp().ln_1p()
    }
}

/// Scalar network `h(x) = sum_k v_k tanh(w_k x + c_k) + d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanhNet {
    pub w: Vec<f64>,
    pub c: Vec<f64>,
    pub v: Vec<f64>,
    pub d: f64,
}

impl TanhNet {
    pub fn zero(width: usize) -> Self {
        Self {
            w: vec![0.0; width],
            c: vec![0.0; width],
            v: vec![0.0; width],
            d: 0.0,
        }
    }

    /// Weights `w ~ U(-in_scale, in_scale)`, `c ~ U(-1, 1)`,
    /// `v ~ U(-out_scale, out_scale)`.
    pub fn random<R: Rng + ?Sized>(width: usize, in_scale: f64, out_scale: f64, r: &mut R) -> Self {
        let mut u = |s: f64| s * (2.0 * r.random::<f64>() - 1.0);
        let w = (0..width).map(|_| u(in_scale)).collect();
        let c = (0..width).map(|_| u(1.0)).collect();
        let v = (0..width).map(|_| u(out_scale)).collect();
        Self { w, c, v, d: 0.0 }
    }

    pub fn width(&self) -> usize {
        self.w.len()
    }

    pub fn n_params(&self) -> usize {
        3 * self.width() + 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut y = self.d;
        for k in 0..self.width() {
            y += self.v[k] * (self.w[k] * x + self.c[k]).tanh();
        }
        y
    }

    /// Adds `upstream * dh/dtheta` to `grad`, laid out as `[w, c, v, d]`.
    pub fn accumulate_grad(&self, x: f64, upstream: f64, grad: &mut [f64]) {
        let m = self.width();
        for k in 0..m {
            let t = (self.w[k] * x + self.c[k]).tanh();
            let dt = upstream * self.v[k] * (1.0 - t * t);
            grad[k] += dt * x;
            grad[m + k] += dt;
            grad[2 * m + k] += upstream * t;
        }
        grad[3 * m] += upstream;
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend(&self.w);
        p.extend(&self.c);
        p.extend(&self.v);
        p.push(self.d);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let m = self.width();
        self.w.copy_from_slice(&p[..m]);
        self.c.copy_from_slice(&p[m..2 * m]);
        self.v.copy_from_slice(&p[2 * m..3 * m]);
        self.d = p[3 * m];
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum PairMechanism {
    Anm {
        f: SinusoidMechanism,
    },
    Pnl {
        f: SinusoidMechanism,
        g: SoftplusPostMap,
    },
    Carefl {
        alpha: TanhNet,
        beta: TanhNet,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairOptions {
    /// Distribution of the cause `x1`.
    pub cause: SourceDistribution,
    /// Forces `f = 0` (additive noise / post-nonlinear) or `beta = 0` and
    /// `alpha = 0` (affine), so that `x2` does not depend on `x1`.
    pub no_edge: bool,
    /// Post-nonlinear map replaced by the identity.
    pub identity_post: bool,
    /// Affine model with `alpha = 0`, i.e. an additive noise model.
    pub zero_alpha: bool,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self {
            cause: SourceDistribution::new(SourceKind::Gaussian),
            no_edge: false,
            identity_post: false,
            zero_alpha: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PairData {
    pub data: Dataset,
    pub direction: Direction,
    pub mechanism: PairMechanism,
}

struct PairDraws {
    x1: Vec<f64>,
    e2: Vec<f64>,
}

fn draws(
    n_samples: usize,
    noise: SourceDistribution,
    seed: u64,
    opts: &PairOptions,
) -> Result<PairDraws> {
    if n_samples < MIN_PAIR_ROWS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIR_ROWS,
            got: n_samples,
        });
    }
    noise.validate()?;
    opts.cause.validate()?;
    let e2 = noise.sample_vec(n_samples, &mut rng::child(seed, 1));
    let x1 = opts.cause.sample_vec(n_samples, &mut rng::child(seed, 3));
    Ok(PairDraws { x1, e2 })
}

fn direction(no_edge: bool) -> Direction {
    if no_edge {
        Direction::NoEdge
    } else {
        Direction::X1ToX2
    }
}

fn pair(x1: Vec<f64>, x2: Vec<f64>, dir: Direction, mechanism: PairMechanism) -> Result<PairData> {
    Ok(PairData {
        data: Dataset::from_columns(&[x1, x2])?,
        direction: dir,
        mechanism,
    })
}

fn anm_mechanism(seed: u64, opts: &PairOptions) -> SinusoidMechanism {
    let f = SinusoidMechanism::random(&mut rng::child(seed, 0));
    if opts.no_edge {
        SinusoidMechanism::zero()
    } else {
        f
    }
}

/// `x2 = f(x1) + e2`.
pub fn gen_anm(
    n_samples: usize,
    noise: SourceDistribution,
    seed: u64,
    opts: PairOptions,
) -> Result<PairData> {
    let d = draws(n_samples, noise, seed, &opts)?;
    let f = anm_mechanism(seed, &opts);
    let x2 =
        d.x1.iter()
            .zip(&d.e2)
            .map(|(&x, &e)| f.eval(x) + e)
            .collect();
    pair(d.x1, x2, direction(opts.no_edge), PairMechanism::Anm { f })
}

/// `x2 = g(f(x1) + e2)` with `g` strictly increasing.
pub fn gen_pnl(
    n_samples: usize,
    noise: SourceDistribution,
    seed: u64,
    opts: PairOptions,
) -> Result<PairData> {
    let d = draws(n_samples, noise, seed, &opts)?;
    let f = anm_mechanism(seed, &opts);
    let g = SoftplusPostMap::random(&mut rng::child(seed, 2));
    let g = if opts.identity_post {
        SoftplusPostMap::identity()
    } else {
        g
    };
    let x2 =
        d.x1.iter()
            .zip(&d.e2)
            .map(|(&x, &e)| g.eval(f.eval(x) + e))
            .collect();
    pair(
        d.x1,
        x2,
        direction(opts.no_edge),
        PairMechanism::Pnl { f, g },
    )
}

/// `x2 = exp(alpha(x1)) z2 + beta(x1)` with standardized `z2`.
pub fn gen_carefl(
    n_samples: usize,
    noise: SourceDistribution,
    seed: u64,
    opts: PairOptions,
) -> Result<PairData> {
    let d = draws(n_samples, noise, seed, &opts)?;
    let mut r = rng::child(seed, 0);
    let mut alpha = TanhNet::random(8, 1.5, 0.25, &mut r);
    let mut beta = TanhNet::random(8, 1.5, 1.0, &mut r);
    if opts.zero_alpha || opts.no_edge {
        alpha = TanhNet::zero(8);
    }
    if opts.no_edge {
        beta = TanhNet::zero(8);
    }
    let z = stats::standardize(&d.e2)?;
    let x2 =
        d.x1.iter()
            .zip(&z)
            .map(|(&x, &z)| alpha.eval(x).exp() * z + beta.eval(x))
            .collect();
    pair(
        d.x1,
        x2,
        direction(opts.no_edge),
        PairMechanism::Carefl { alpha, beta },
    )
}

/// Segment-modulated bivariate SEM `x1 = f1(e1)`, `x2 = f2(x1, e2)`.
#[derive(Debug, Clone)]
pub struct NonsensPair {
    pub data: Dataset,
    /// True disturbances `(e1, e2)`.
    pub disturbances: DMatrix<f64>,
    pub mixer: MlpFunction,
    pub spec: NonstationarySpec,
    pub direction: Direction,
    pub warnings: Vec<String>,
}

/// Two-layer leaky-relu mixer whose weight matrices are lower triangular
/// (`x1 -> x2`) or diagonal (no edge), driven by Gaussian disturbances with
/// segment-dependent variances.
pub fn gen_nonsens_pair(
    n_segments: usize,
    samples_per_segment: usize,
    lambda_range: (f64, f64),
    edge: bool,
    seed: u64,
) -> Result<NonsensPair> {
    let spec = NonstationarySpec::random(2, n_segments, samples_per_segment, lambda_range, seed);
    let mut r = rng::child(seed, 0);
    let mag = |r: &mut rng::Rng| {
        let s = if r.random::<bool>() { 1.0 } else { -1.0 };
        s * (0.5 + r.random::<f64>())
    };
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for _ in 0..2 {
        let (a, b, c) = (mag(&mut r), mag(&mut r), mag(&mut r));
        let off = if edge { b } else { 0.0 };
        weights.push(DMatrix::from_row_slice(2, 2, &[a, 0.0, off, c]));
        biases.push(DVector::from_fn(2, |_, _| {
            0.2 * (2.0 * r.random::<f64>() - 1.0)
        }));
    }
    let mixer = MlpFunction::new(weights, biases, Activation::LeakyRelu { slope: 0.2 })?;
    let out = gen_nonstationary_nica(2, &spec, &mixer, seed)?;
    Ok(NonsensPair {
        data: out.data,
        disturbances: out.sources,
        mixer,
        spec,
        direction: direction(!edge),
        warnings: out.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::DEFAULT_LAMBDA_RANGE;

    fn laplace() -> SourceDistribution {
        SourceDistribution::new(SourceKind::Laplace)
    }

    #[test]
    fn zero_mechanism_gives_pure_noise() {
        let opts = PairOptions {
            no_edge: true,
            ..Default::default()
        };
        let p = gen_anm(200, laplace(), 4, opts).unwrap();
        let e2 = laplace().sample_vec(200, &mut rng::child(4, 1));
        assert_eq!(p.data.column(1), e2);
        assert_eq!(p.direction, Direction::NoEdge);
    }

    #[test]
    fn identity_post_map_matches_additive_model() {
        let opts = PairOptions {
            identity_post: true,
            ..Default::default()
        };
        let a = gen_anm(300, laplace(), 9, PairOptions::default()).unwrap();
        let p = gen_pnl(300, laplace(), 9, opts).unwrap();
        assert_eq!(a.data.values(), p.data.values());
    }

    #[test]
    fn zero_alpha_is_additive() {
        let opts = PairOptions {
            zero_alpha: true,
            ..Default::default()
        };
        let p = gen_carefl(500, laplace(), 2, opts).unwrap();
        let PairMechanism::Carefl { alpha, beta } = &p.mechanism else {
            panic!("wrong mechanism")
        };
        assert!(alpha.params().iter().all(|&v| v == 0.0));
        // residual x2 - beta(x1) is the standardized noise, unit variance
        let res: Vec<f64> = (0..500)
            .map(|i| p.data.values()[(i, 1)] - beta.eval(p.data.values()[(i, 0)]))
            .collect();
        assert!((stats::variance(&res) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn post_map_is_strictly_increasing() {
        let g = SoftplusPostMap::random(&mut rng::rng(1));
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=400 {
            let v = g.eval(-10.0 + 0.05 * i as f64);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn tanh_net_gradient_matches_finite_differences() {
        let net = TanhNet::random(4, 1.0, 1.0, &mut rng::rng(5));
        let mut grad = vec![0.0; net.n_params()];
        net.accumulate_grad(0.7, 1.0, &mut grad);
        let p = net.params();
        for k in 0..p.len() {
            let mut plus = net.clone();
            let mut minus = net.clone();
            let mut q = p.clone();
            q[k] += 1e-6;
            plus.set_params(&q);
            q[k] -= 2e-6;
            minus.set_params(&q);
            let fd = (plus.eval(0.7) - minus.eval(0.7)) / 2e-6;
            assert!((fd - grad[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn nonsens_pair_structure() {
        let p = gen_nonsens_pair(5, 50, DEFAULT_LAMBDA_RANGE, true, 3).unwrap();
        assert_eq!(p.data.n_segments(), 5);
        // x1 depends on e1 only: perturbing e2 leaves it unchanged
        let s = p.disturbances.row(0);
        let a = p.mixer.eval(&[s[0], s[1]]);
        let b = p.mixer.eval(&[s[0], s[1] + 1.0]);
        assert_eq!(a[0], b[0]);
        assert_ne!(a[1], b[1]);
        let q = gen_nonsens_pair(5, 50, DEFAULT_LAMBDA_RANGE, false, 3).unwrap();
        let c = q.mixer.eval(&[s[0] + 1.0, s[1]]);
        let d = q.mixer.eval(&[s[0], s[1]]);
        assert_eq!(c[1], d[1]);
        assert_eq!(q.direction, Direction::NoEdge);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_carefl(200, laplace(), 11, PairOptions::default()).unwrap();
        let b = gen_carefl(200, laplace(), 11, PairOptions::default()).unwrap();
        assert_eq!(a.data.values(), b.data.values());
        assert!(gen_anm(99, laplace(), 0, PairOptions::default()).is_err());
    }
}
