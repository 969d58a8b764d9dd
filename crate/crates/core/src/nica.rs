//! Nonlinear ICA from segment-labelled data: train a feature extractor to
//! classify segments, then undo the remaining linear mixing of the features
//! with linear ICA.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::ica::{estimate_ica, IcaConfig, IcaResult};
use crate::synth::Activation;
use crate::{linalg, rng, stats};

pub const FORMAT_VERSION: u32 = 1;
pub const HIDDEN_SLOPE: f64 = 0.1;

/// Feed-forward map `n -> hidden... -> n` (leaky-relu hidden layers, linear
/// output) followed by a linear classifier head producing segment logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub layer_sizes: Vec<usize>,
    /// `weights[l]` maps layer `l` to layer `l + 1` (rows = outputs).
    #[serde(with = "crate::json::matrices")]
    pub weights: Vec<DMatrix<f64>>,
    #[serde(with = "crate::json::vectors")]
    pub biases: Vec<DVector<f64>>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    #[serde(with = "crate::json::matrix")]
    pub head_weights: DMatrix<f64>,
    #[serde(with = "crate::json::vector")]
    pub head_bias: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct ExtractorDocument {
    format_version: u32,
    #[serde(flatten)]
    extractor: FeatureExtractor,
}

impl FeatureExtractor {
    /// Glorot-uniform layers and a zero classifier head.
    pub fn new<R: Rng + ?Sized>(
        layer_sizes: &[usize],
        n_classes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) || n_classes < 1 {
            return Err(Error::Precondition(format!(
                "invalid architecture {layer_sizes:?} with {n_classes} classes"
            )));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_sizes.windows(2) {
            let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
            weights.push(DMatrix::from_fn(w[1], w[0], |_, _| {
                limit * (2.0 * rng.random::<f64>() - 1.0)
            }));
            biases.push(DVector::zeros(w[1]));
        }
        let n_out = *layer_sizes.last().expect("non-empty");
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            hidden_activation: Activation::LeakyRelu {
                slope: HIDDEN_SLOPE,
            },
            output_activation: Activation::Identity,
            head_weights: DMatrix::zeros(n_classes, n_out),
            head_bias: DVector::zeros(n_classes),
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_features(&self) -> usize {
        *self.layer_sizes.last().expect("non-empty")
    }

    pub fn n_classes(&self) -> usize {
        self.head_bias.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.layer_sizes.len();
        if l < 2 || self.weights.len() != l - 1 || self.biases.len() != l - 1 {
            return Err(Error::Shape("layer count mismatch".into()));
        }
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            linalg::shape_check(
                w,
                self.layer_sizes[k + 1],
                self.layer_sizes[k],
                &format!("layer {k} weights"),
            )?;
            if b.len() != self.layer_sizes[k + 1] {
                return Err(Error::Shape(format!(
                    "layer {k} bias has length {}",
                    b.len()
                )));
            }
        }
        linalg::shape_check(
            &self.head_weights,
            self.head_bias.len(),
            self.n_features(),
            "head weights",
        )?;
        if self.params().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("extractor parameters".into()));
        }
        Ok(())
    }

    /// Flattened parameters: each layer's weights (row-major) then bias,
    /// then the head weights and bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            p.extend(w.transpose().iter());
            p.extend(b.iter());
        }
        p.extend(self.head_weights.transpose().iter());
        p.extend(self.head_bias.iter());
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        fn fill_matrix(m: &mut DMatrix<f64>, p: &[f64], k: &mut usize) {
            let (r, c) = m.shape();
            *m = DMatrix::from_row_slice(r, c, &p[*k..*k + r * c]);
            *k += r * c;
        }
        fn fill_vector(v: &mut DVector<f64>, p: &[f64], k: &mut usize) {
            let n = v.len();
            v.copy_from_slice(&p[*k..*k + n]);
            *k += n;
        }
        let mut k = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            fill_matrix(w, p, &mut k);
            fill_vector(b, p, &mut k);
        }
        fill_matrix(&mut self.head_weights, p, &mut k);
        fill_vector(&mut self.head_bias, p, &mut k);
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ExtractorDocument {
            format_version: FORMAT_VERSION,
            extractor: self.clone(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ExtractorDocument =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {}",
                doc.format_version
            )));
        }
        doc.extractor.validate()?;
        Ok(doc.extractor)
    }

    /// Folds an input affine normalization `(x - mean) / scale` into the
    /// first layer.
    fn absorb_input_normalization(&mut self, mean: &[f64], scale: &[f64]) {
        let w = &mut self.weights[0];
        for j in 0..w.ncols() {
            let mut col = w.column_mut(j);
            col /= scale[j];
        }
        let shift = &*w * DVector::from_column_slice(mean);
        self.biases[0] -= shift;
    }
}

struct Tape {
    pre: Vec<DMatrix<f64>>,
    post: Vec<DMatrix<f64>>,
}

fn affine(a: &DMatrix<f64>, w: &DMatrix<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    let mut z = a * w.transpose();
    for mut row in z.row_iter_mut() {
        row += b.transpose();
    }
    z
}

fn forward_tape(ex: &FeatureExtractor, batch: &DMatrix<f64>) -> Tape {
    let last = ex.weights.len() - 1;
    let mut pre = Vec::with_capacity(ex.weights.len());
    let mut post = vec![batch.clone()];
    for (l, (w, b)) in ex.weights.iter().zip(&ex.biases).enumerate() {
        let z = affine(&post[l], w, b);
        let act = if l < last {
            ex.hidden_activation
        } else {
            ex.output_activation
        };
        post.push(z.map(|v| act.apply(v)));
        pre.push(z);
    }
    Tape { pre, post }
}

/// Returns `(features, logits)`, one row per input row.
pub fn mlp_forward(
    ex: &FeatureExtractor,
    batch: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if batch.ncols() != ex.n_inputs() {
        return Err(Error::Shape(format!(
            "batch has {} columns, extractor expects {}",
            batch.ncols(),
            ex.n_inputs()
        )));
    }
    let mut tape = forward_tape(ex, batch);
    let features = tape.post.pop().expect("output layer");
    let logits = affine(&features, &ex.head_weights, &ex.head_bias);
    Ok((features, logits))
}

fn log_softmax_rows(logits: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = logits.clone();
    for mut row in out.row_iter_mut() {
        let m = row.max();
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        row.add_scalar_mut(-lse);
    }
    out
}

/// Gradient of the mean cross-entropy with the same layout as the
/// extractor's parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub loss: f64,
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
    pub head_weights: DMatrix<f64>,
    pub head_bias: DVector<f64>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        let mut p = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            p.extend(w.transpose().iter());
            p.extend(b.iter());
        }
        p.extend(self.head_weights.transpose().iter());
        p.extend(self.head_bias.iter());
        p
    }

    pub fn norm(&self) -> f64 {
        self.flatten().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn check_labels(ex: &FeatureExtractor, batch: &DMatrix<f64>, labels: &[usize]) -> Result<()> {
    if labels.len() != batch.nrows() {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            batch.nrows()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= ex.n_classes()) {
        return Err(Error::LabelOutOfRange {
            label: bad,
            n_classes: ex.n_classes(),
        });
    }
    Ok(())
}

/// Mean cross-entropy of the segment labels.
pub fn mlp_loss(ex: &FeatureExtractor, batch: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    check_labels(ex, batch, labels)?;
    let (_, logits) = mlp_forward(ex, batch)?;
    let lp = log_softmax_rows(&logits);
    Ok(-labels
        .iter()
        .enumerate()
        .map(|(i, &l)| lp[(i, l)])
        .sum::<f64>()
        / labels.len() as f64)
}

/// Exact gradient of the mean cross-entropy by reverse accumulation.
pub fn mlp_gradient(
    ex: &FeatureExtractor,
    batch: &DMatrix<f64>,
    labels: &[usize],
) -> Result<Gradients> {
    if batch.ncols() != ex.n_inputs() {
        return Err(Error::Shape(format!(
            "batch has {} columns, extractor expects {}",
            batch.ncols(),
            ex.n_inputs()
        )));
    }
    check_labels(ex, batch, labels)?;
    let m = batch.nrows() as f64;
    let tape = forward_tape(ex, batch);
    let features = tape.post.last().expect("output layer");
    let logits = affine(features, &ex.head_weights, &ex.head_bias);
    let lp = log_softmax_rows(&logits);
    let loss = -labels
        .iter()
        .enumerate()
        .map(|(i, &l)| lp[(i, l)])
        .sum::<f64>()
        / m;

    let mut d = lp.map(f64::exp);
    for (i, &l) in labels.iter().enumerate() {
        d[(i, l)] -= 1.0;
    }
    d /= m;
    let head_weights = d.transpose() * features;
    let head_bias = DVector::from_iterator(d.ncols(), d.column_iter().map(|c| c.sum()));
    let mut da = &d * &ex.head_weights;

    let n_layers = ex.weights.len();
    let mut weights = vec![DMatrix::zeros(0, 0); n_layers];
    let mut biases = vec![DVector::zeros(0); n_layers];
    for l in (0..n_layers).rev() {
        let act = if l + 1 < n_layers {
            ex.hidden_activation
        } else {
            ex.output_activation
        };
        let dz = da.zip_map(&tape.pre[l], |g, z| g * act.derivative(z));
        weights[l] = dz.transpose() * &tape.post[l];
        biases[l] = DVector::from_iterator(dz.ncols(), dz.column_iter().map(|c| c.sum()));
        if l > 0 {
            da = &dz * &ex.weights[l];
        }
    }
    Ok(Gradients {
        loss,
        weights,
        biases,
        head_weights,
        head_bias,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Defaults to `[2n, 2n]` when empty.
    pub hidden_widths: Vec<usize>,
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            momentum: 0.9,
            batch_size: 64,
            epochs: 500,
            seed: 0,
            hidden_widths: Vec::new(),
            weight_decay: 1e-5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.epochs < 1 || self.batch_size < 1 {
            return Err(Error::Precondition(
                "learning rate must be positive, epochs and batch size at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) || self.weight_decay < 0.0 {
            return Err(Error::Precondition(
                "momentum must be in [0, 1), weight decay >= 0".into(),
            ));
        }
        Ok(())
    }

    fn architecture(&self, n: usize) -> Vec<usize> {
        let mut sizes = vec![n];
        if self.hidden_widths.is_empty() {
            sizes.extend([2 * n, 2 * n]);
        } else {
            sizes.extend(&self.hidden_widths);
        }
        sizes.push(n);
        sizes
    }
}

#[derive(Debug, Clone)]
pub struct NicaResult {
    pub extractor: FeatureExtractor,
    pub features: DMatrix<f64>,
    pub components: DMatrix<f64>,
    pub classifier_accuracy: f64,
    pub linear_stage: IcaResult,
    /// Training-set loss after each epoch.
    pub loss_history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Trains only the extractor; returns it with the per-epoch loss.
pub fn train_extractor(
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<(FeatureExtractor, Vec<f64>, Vec<String>)> {
    cfg.validate()?;
    let labels = data
        .segment_labels()
        .ok_or_else(|| Error::Precondition("segment labels are required".into()))?
        .to_vec();
    let n_classes = data.n_segments();
    let n = data.n_cols();
    if n_classes < 2 {
        return Err(Error::Precondition(
            "need at least 2 segments; a single segment is stationary and unidentifiable".into(),
        ));
    }
    let mut warnings = Vec::new();
    if n_classes - 1 < n {
        warnings.push(format!(
            "only {n_classes} segments for {n} components: too little nonstationarity, components may be unidentifiable"
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let mean: Vec<f64> = (0..n).map(|j| stats::mean(&data.column(j))).collect();
    let scale: Vec<f64> = (0..n).map(|j| stats::std_dev(&data.column(j))).collect();
    if let Some(j) = scale.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::ZeroVariance(format!("column {j}")));
    }
    let x = DMatrix::from_fn(data.n_rows(), n, |i, j| {
        (data.values()[(i, j)] - mean[j]) / scale[j]
    });

    let mut ex = FeatureExtractor::new(
        &cfg.architecture(n),
        n_classes,
        &mut rng::child(cfg.seed, 0),
    )?;
    let mut theta = ex.params();
    let decay_mask = decay_mask(&ex);
    let mut velocity = vec![0.0; theta.len()];
    let mut order: Vec<usize> = (0..data.n_rows()).collect();
    let mut shuffle_rng = rng::child(cfg.seed, 1);
    let bs = cfg.batch_size.min(data.n_rows());
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if bs < data.n_rows() {
            order.shuffle(&mut shuffle_rng);
        }
        for chunk in order.chunks(bs) {
            let batch = DMatrix::from_fn(chunk.len(), n, |i, j| x[(chunk[i], j)]);
            let y: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let g = mlp_gradient(&ex, &batch, &y)?;
            if !g.loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            let flat = g.flatten();
            for k in 0..theta.len() {
                let step = flat[k] + cfg.weight_decay * decay_mask[k] * theta[k];
                velocity[k] = cfg.momentum * velocity[k] - cfg.learning_rate * step;
                theta[k] += velocity[k];
            }
            if theta.iter().any(|v| !v.is_finite()) {
                return Err(Error::TrainingDiverged { epoch });
            }
            ex.set_params(&theta);
        }
        history.push(mlp_loss(&ex, &x, &labels)?);
    }
    ex.absorb_input_normalization(&mean, &scale);
    Ok((ex, history, warnings))
}

fn decay_mask(ex: &FeatureExtractor) -> Vec<f64> {
    let mut m = Vec::new();
    for (w, b) in ex.weights.iter().zip(&ex.biases) {
        m.extend(std::iter::repeat(1.0).take(w.len()));
        m.extend(std::iter::repeat(0.0).take(b.len()));
    }
    m.extend(std::iter::repeat(1.0).take(ex.head_weights.len()));
    m.extend(std::iter::repeat(0.0).take(ex.head_bias.len()));
    m
}

/// Fraction of rows whose largest logit is the true segment.
pub fn classifier_accuracy(ex: &FeatureExtractor, data: &Dataset) -> Result<f64> {
    let labels = data
        .segment_labels()
        .ok_or_else(|| Error::Precondition("segment labels are required".into()))?;
    let (_, logits) = mlp_forward(ex, data.values())?;
    let hits = logits
        .row_iter()
        .zip(labels)
        .filter(|(row, &l)| argmax(row.iter()) == l)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

fn argmax<'a>(values: impl Iterator<Item = &'a f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0
}

/// Maps a linearly unmixed feature, expected to be an affine function of a
/// squared source, back to source scale: orient so the feature is right
/// skewed, shift its lower tail to zero, take the signed square root and
/// scale to unit root mean square. The result estimates the source
/// magnitude, so it is not centered.
fn desquash(c: &[f64]) -> Result<Vec<f64>> {
    let sign = if stats::skewness(c)? < 0.0 { -1.0 } else { 1.0 };
    let oriented: Vec<f64> = c.iter().map(|v| sign * v).collect();
    let floor = stats::quantile(&oriented, 0.001);
    let root: Vec<f64> = oriented
        .iter()
        .map(|v| {
            let u = v - floor;
            u.signum() * u.abs().sqrt()
        })
        .collect();
    let rms = (root.iter().map(|v| v * v).sum::<f64>() / root.len() as f64).sqrt();
    if !(rms > 0.0) {
        return Err(Error::ZeroVariance("unmixed feature".into()));
    }
    Ok(root.iter().map(|v| v / rms).collect())
}

/// Trains the extractor, unmixes its features with linear ICA and maps each
/// component back to source scale.
pub fn train_nica(data: &Dataset, cfg: &TrainConfig) -> Result<NicaResult> {
    let (extractor, loss_history, warnings) = train_extractor(data, cfg)?;
    let classifier_accuracy = classifier_accuracy(&extractor, data)?;
    let (features, _) = mlp_forward(&extractor, data.values())?;
    let ica_cfg = IcaConfig {
        seed: rng::derive(cfg.seed, 2),
        ..Default::default()
    };
    let linear_stage = estimate_ica(&Dataset::new(features.clone())?, &ica_cfg)?;
    let mut components = DMatrix::zeros(features.nrows(), features.ncols());
    for (j, c) in linear_stage.components.column_iter().enumerate() {
        let v = desquash(c.as_slice())?;
        components.column_mut(j).copy_from_slice(&v);
    }
    Ok(NicaResult {
        extractor,
        features,
        components,
        classifier_accuracy,
        linear_stage,
        loss_history,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_net(sizes: &[usize], classes: usize, seed: u64) -> FeatureExtractor {
        let mut r = rng::rng(seed);
        let mut ex = FeatureExtractor::new(sizes, classes, &mut r).unwrap();
        let p: Vec<f64> = ex
            .params()
            .iter()
            .map(|_| r.random::<f64>() - 0.5)
            .collect();
        ex.set_params(&p);
        ex
    }

    #[test]
    fn zero_network_is_uniform() {
        let mut ex = random_net(&[2, 3, 2], 4, 1);
        let zeros = vec![0.0; ex.params().len()];
        ex.set_params(&zeros);
        let batch = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.3, 0.4]);
        let (f, logits) = mlp_forward(&ex, &batch).unwrap();
        assert!(f.iter().all(|&v| v == 0.0));
        let lp = log_softmax_rows(&logits);
        assert!(lp.iter().all(|&v| (v + 4f64.ln()).abs() < 1e-15));
    }

    #[test]
    fn identity_single_layer() {
        let mut ex = FeatureExtractor::new(&[3, 3], 2, &mut rng::rng(0)).unwrap();
        ex.weights[0] = DMatrix::identity(3, 3);
        let batch = DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 3.0, 0.5, 0.0, -0.1]);
        let (f, _) = mlp_forward(&ex, &batch).unwrap();
        assert_eq!(f, batch);
    }

    #[test]
    fn params_round_trip() {
        let ex = random_net(&[3, 4, 3], 5, 2);
        let mut other = FeatureExtractor::new(&[3, 4, 3], 5, &mut rng::rng(9)).unwrap();
        other.set_params(&ex.params());
        assert_eq!(other, ex);
        let json = ex.to_json().unwrap();
        assert!(json.contains("\"format_version\": 1"));
        let back = FeatureExtractor::from_json(&json).unwrap();
        assert_eq!(back.layer_sizes, ex.layer_sizes);
        assert!(linalg::max_abs_diff(&back.weights[0], &ex.weights[0]) < 1e-11);
    }

    #[test]
    fn duplicated_batch_same_gradient() {
        let ex = random_net(&[3, 4, 3], 3, 3);
        let batch = DMatrix::from_fn(5, 3, |i, j| (i as f64 - 2.0) * 0.3 + j as f64 * 0.1);
        let labels = vec![0, 1, 2, 1, 0];
        let g = mlp_gradient(&ex, &batch, &labels).unwrap().flatten();
        let doubled = DMatrix::from_fn(10, 3, |i, j| batch[(i % 5, j)]);
        let l2: Vec<usize> = (0..10).map(|i| labels[i % 5]).collect();
        let g2 = mlp_gradient(&ex, &doubled, &l2).unwrap().flatten();
        for (a, b) in g.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn labels_out_of_range() {
        let ex = random_net(&[2, 2], 2, 4);
        let batch = DMatrix::zeros(1, 2);
        assert!(matches!(
            mlp_gradient(&ex, &batch, &[2]),
            Err(Error::LabelOutOfRange {
                label: 2,
                n_classes: 2
            })
        ));
    }

    #[test]
    fn absorbed_normalization_matches_explicit() {
        let mut ex = random_net(&[2, 3, 2], 2, 5);
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let (mean, scale) = ([0.5, -1.0], [2.0, 0.25]);
        let xn = DMatrix::from_fn(2, 2, |i, j| (x[(i, j)] - mean[j]) / scale[j]);
        let (f1, _) = mlp_forward(&ex, &xn).unwrap();
        ex.absorb_input_normalization(&mean, &scale);
        let (f2, _) = mlp_forward(&ex, &x).unwrap();
        assert!(linalg::max_abs_diff(&f1, &f2) < 1e-12);
    }

    #[test]
    fn missing_labels_rejected() {
        let d = Dataset::new(DMatrix::from_fn(10, 2, |i, j| (i * 3 + j) as f64 % 7.0)).unwrap();
        assert!(matches!(
            train_nica(&d, &TrainConfig::default()),
            Err(Error::Precondition(_))
        ));
    }
}
