//! Benchmark fixtures shared by the criterion targets.

use identikit::rng;
use identikit::synth::{gen_linear_ica, LinearIcaOptions, SourceDistribution, SourceKind};
use identikit::Dataset;
use nalgebra::DMatrix;

/// Laplace sources mixed by a random well-conditioned matrix.
pub fn mixed_laplace(n_vars: usize, n_samples: usize, seed: u64) -> Dataset {
    let dist = SourceDistribution::new(SourceKind::Laplace);
    gen_linear_ica(n_vars, n_samples, dist, seed, LinearIcaOptions::default())
        .expect("valid generator arguments")
        .0
}

/// Two independent Gaussian columns.
pub fn gaussian_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let g = SourceDistribution::new(SourceKind::Gaussian);
    (
        g.sample_vec(n, &mut rng::child(seed, 0)),
        g.sample_vec(n, &mut rng::child(seed, 1)),
    )
}

/// A batch of `rows` inputs in `[-1, 1]^cols` with cyclic labels.
pub fn labelled_batch(
    rows: usize,
    cols: usize,
    classes: usize,
    seed: u64,
) -> (DMatrix<f64>, Vec<usize>) {
    let u = SourceDistribution::new(SourceKind::Uniform);
    let batch = u.sample_matrix(rows, cols, &mut rng::child(seed, 0));
    (batch, (0..rows).map(|i| i % classes).collect())
}
