//! Scalar sample statistics.

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

/// Zero-mean, unit-variance copy of `x`.
pub fn standardize(x: &[f64]) -> Result<Vec<f64>> {
    let m = mean(x);
    let s = std_dev(x);
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::ZeroVariance("sample has zero variance".into()));
    }
    Ok(x.iter().map(|v| (v - m) / s).collect())
}

/// Excess kurtosis `E[z^4] - 3` of the standardized sample (moment form).
pub fn excess_kurtosis(x: &[f64]) -> Result<f64> {
    let (m2, m4) = central_moments(x, 4)?;
    Ok(m4 / (m2 * m2) - 3.0)
}

pub fn skewness(x: &[f64]) -> Result<f64> {
    let (m2, m3) = central_moments(x, 3)?;
    Ok(m3 / m2.powf(1.5))
}

fn central_moments(x: &[f64], k: i32) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let m = mean(x);
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    if !(m2 > 0.0) {
        return Err(Error::ZeroVariance("sample has zero variance".into()));
    }
    let mk = x.iter().map(|v| (v - m).powi(k)).sum::<f64>() / n;
    Ok((m2, mk))
}

/// Pearson correlation; `None` when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Fractional ranks (ties get the average rank), 0-based.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&ranks(x), &ranks(y))
}

/// Median (mean of the two central values for even lengths). Reorders `x`.
pub fn median_in_place(x: &mut [f64]) -> f64 {
    let n = x.len();
    assert!(n > 0, "median of empty slice");
    let mid = n / 2;
    let (_, &mut hi, _) = x.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        hi
    } else {
        let lo = x[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

pub fn median(x: &[f64]) -> f64 {
    median_in_place(&mut x.to_vec())
}

/// Linear-interpolated quantile, `q` in [0, 1].
pub fn quantile(x: &[f64], q: f64) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `x` and U(0, 1).
pub fn ks_uniform(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &u)| {
            let u = u.clamp(0.0, 1.0);
            ((i as f64 + 1.0) / n - u)
                .abs()
                .max((u - i as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}
