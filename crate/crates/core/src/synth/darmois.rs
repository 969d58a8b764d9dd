//! Conditional-CDF construction: from any 2D sample, build a variable `z`
//! that is uniform and independent of `x1`, whatever the true sources were.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::independence::median_heuristic;

pub const DARMOIS_MIN_ROWS: usize = 500;

/// Kernel bandwidth on `x1`: median heuristic shrunk by `n^(-1/5)`.
pub fn darmois_bandwidth(x1: &[f64]) -> Result<f64> {
    Ok(median_heuristic(x1)? * (x1.len() as f64).powf(-0.2))
}

/// `z_i ~ P(x2 < x2_i | x1 = x1_i)`, estimated with Gaussian kernel weights
/// on `x1` (mid-rank convention for ties, including `i` itself). Neighbours
/// are first moved along the kernel-weighted regression line of `x2` on `x1`.
pub fn darmois_construct(data: &Dataset) -> Result<Vec<f64>> {
    if data.n_cols() != 2 {
        return Err(Error::Shape(format!(
            "expected 2 columns, got {}",
            data.n_cols()
        )));
    }
    let n = data.n_rows();
    if n < DARMOIS_MIN_ROWS {
        return Err(Error::InsufficientData {
            needed: DARMOIS_MIN_ROWS,
            got: n,
        });
    }
    let x1 = data.column(0);
    let x2 = data.column(1);
    let h = darmois_bandwidth(&x1)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x1[a].total_cmp(&x1[b]));
    let sorted_x1: Vec<f64> = order.iter().map(|&k| x1[k]).collect();
    let reach = 8.0 * h;

    let z = (0..n)
        .into_par_iter()
        .map(|i| {
            let lo = sorted_x1.partition_point(|&v| v < x1[i] - reach);
            let hi = sorted_x1.partition_point(|&v| v <= x1[i] + reach);
            let window = &order[lo..hi];
            let weights: Vec<f64> = window
                .iter()
                .map(|&j| {
                    let u = (x1[i] - x1[j]) / h;
                    (-0.5 * u * u).exp()
                })
                .collect();
            let slope = local_slope(window.iter().map(|&j| (x1[j], x2[j])), &weights);
            let (mut below, mut total) = (0.0, 0.0);
            for (&j, &w) in window.iter().zip(&weights) {
                // neighbour moved along the local trend to x1 = x1[i]
                let shifted = x2[j] + slope * (x1[i] - x1[j]);
                total += w;
                if shifted < x2[i] {
                    below += w;
                } else if shifted == x2[i] {
                    below += 0.5 * w;
                }
            }
            below / total
        })
        .collect();
    Ok(z)
}

/// Weighted least-squares slope of `y` on `x`; zero when `x` has no spread.
fn local_slope(points: impl Iterator<Item = (f64, f64)>, weights: &[f64]) -> f64 {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((x, y), &w) in points.zip(weights) {
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let var = sxx - sx * sx / sw;
    if var > 1e-12 * sxx.max(1e-300) {
        (sxy - sx * sy / sw) / var
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::stats;
    use crate::synth::{SourceDistribution, SourceKind};

    #[test]
    fn independent_uniform_x2_gives_its_rank_transform() {
        let u = SourceDistribution::new(SourceKind::Uniform);
        let x1 = u.sample_vec(3000, &mut rng::child(1, 0));
        let x2 = u.sample_vec(3000, &mut rng::child(1, 1));
        let d = Dataset::from_columns(&[x1, x2.clone()]).unwrap();
        let z = darmois_construct(&d).unwrap();
        let r = stats::ranks(&x2);
        let ecdf: Vec<f64> = r.iter().map(|v| (v + 0.5) / 3000.0).collect();
        assert!(stats::pearson(&z, &ecdf).unwrap() > 0.99);
        let worst = z
            .iter()
            .zip(&ecdf)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.15, "{worst}");
    }

    #[test]
    fn output_is_near_uniform() {
        let lap = SourceDistribution::new(SourceKind::Laplace);
        let s1 = lap.sample_vec(2000, &mut rng::child(2, 0));
        let s2 = lap.sample_vec(2000, &mut rng::child(2, 1));
        let x1: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| a + 0.5 * b).collect();
        let x2: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| a - b).collect();
        let z = darmois_construct(&Dataset::from_columns(&[x1, x2]).unwrap()).unwrap();
        assert!(z.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(stats::ks_uniform(&z) < 0.05);
    }

    #[test]
    fn too_few_rows() {
        let d = Dataset::from_columns(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0]]).unwrap();
        assert!(matches!(
            darmois_construct(&d),
            Err(Error::InsufficientData { .. })
        ));
    }
}
