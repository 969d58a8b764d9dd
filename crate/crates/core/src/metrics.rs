//! Recovery scores for the permutation/scale/sign indeterminacy of ICA-type
//! models.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Assignment problems up to this size are solved by exhaustive search.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Amari performance index of `p`, normalized to [0, 1].
///
/// Rows are first scaled to unit max-abs, so the index is invariant to
/// `D P Π` for diagonal `D` and signed permutation `Π`. It is zero exactly
/// when `p` is a scaled signed permutation.
pub fn amari_index(p: &DMatrix<f64>) -> Result<f64> {
    let n = p.nrows();
    if n != p.ncols() {
        return Err(Error::Shape(format!(
            "amari index needs a square matrix, got {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    if n < 2 {
        return Ok(0.0);
    }
    let mut a = p.abs();
    for (i, mut row) in a.row_iter_mut().enumerate() {
        let m = row.max();
        if m == 0.0 {
            return Err(Error::Shape(format!("row {i} is all zero")));
        }
        row /= m;
    }
    let mut total = 0.0;
    for row in a.row_iter() {
        total += row.sum() / row.max() - 1.0;
    }
    for (j, col) in a.column_iter().enumerate() {
        let m = col.max();
        if m == 0.0 {
            return Err(Error::Shape(format!("column {j} is all zero")));
        }
        total += col.sum() / m - 1.0;
    }
    Ok(total / (2.0 * n as f64 * (n as f64 - 1.0)))
}

/// Permutation `perm` maximizing `sum_i score[(i, perm[i])]`.
///
/// Exhaustive for `n <= EXHAUSTIVE_LIMIT` (ties go to the lexicographically
/// first permutation), greedy largest-entry-first above.
pub fn best_assignment(score: &DMatrix<f64>) -> Vec<usize> {
    let n = score.nrows();
    if n <= EXHAUSTIVE_LIMIT {
        let mut best = (f64::NEG_INFINITY, (0..n).collect::<Vec<_>>());
        for_each_permutation(n, |perm| {
            let s: f64 = perm.iter().enumerate().map(|(i, &j)| score[(i, j)]).sum();
            if s > best.0 {
                best = (s, perm.to_vec());
            }
        });
        best.1
    } else {
        let mut perm = vec![usize::MAX; n];
        let mut col_used = vec![false; n];
        for _ in 0..n {
            let mut pick = (f64::NEG_INFINITY, 0, 0);
            for i in (0..n).filter(|&i| perm[i] == usize::MAX) {
                for j in (0..n).filter(|&j| !col_used[j]) {
                    if score[(i, j)] > pick.0 || pick.0 == f64::NEG_INFINITY {
                        pick = (score[(i, j)], i, j);
                    }
                }
            }
            perm[pick.1] = pick.2;
            col_used[pick.2] = true;
        }
        perm
    }
}

/// Visits all permutations of `0..n` in lexicographic order.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        f(&p);
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return;
        };
        let j = (i..n)
            .rev()
            .find(|&j| p[j] > p[i - 1])
            .expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MccMode {
    /// Pearson correlation, invariant to permutation, sign and scale.
    SignedLinear,
    /// Spearman correlation of absolute values, for recovery up to a
    /// pointwise even or monotone transform.
    AbsRank,
}

/// Estimated column `i` corresponds to truth column `permutation[i]` with
/// sign `signs[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub permutation: Vec<usize>,
    pub signs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryScore {
    pub amari_index: Option<f64>,
    pub mcc: f64,
    pub matching: Matching,
    /// Matched correlation per estimated component.
    pub correlations: Vec<f64>,
}

/// Mean absolute correlation between estimated and true components under
/// the best matching.
pub fn mcc(estimated: &DMatrix<f64>, truth: &DMatrix<f64>, mode: MccMode) -> Result<RecoveryScore> {
    if estimated.shape() != truth.shape() {
        return Err(Error::Shape(format!(
            "mcc: estimated is {:?}, truth is {:?}",
            estimated.shape(),
            truth.shape()
        )));
    }
    if estimated.nrows() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: estimated.nrows(),
        });
    }
    let prep = |m: &DMatrix<f64>, which: &'static str| -> Result<Vec<Vec<f64>>> {
        m.column_iter()
            .enumerate()
            .map(|(j, c)| {
                let v: Vec<f64> = match mode {
                    MccMode::SignedLinear => c.iter().copied().collect(),
                    MccMode::AbsRank => {
                        stats::ranks(&c.iter().map(|x| x.abs()).collect::<Vec<_>>())
                    }
                };
                if v.iter().all(|&x| x == v[0]) {
                    Err(Error::UndefinedCorrelation { which, column: j })
                } else {
                    Ok(v)
                }
            })
            .collect()
    };
    let est = prep(estimated, "estimated")?;
    let tru = prep(truth, "truth")?;
    let n = est.len();
    let corr = DMatrix::from_fn(n, n, |i, j| {
        stats::pearson(&est[i], &tru[j]).expect("non-constant columns")
    });
    let perm = best_assignment(&corr.abs());
    let correlations: Vec<f64> = (0..n).map(|i| corr[(i, perm[i])]).collect();
    let signs = correlations
        .iter()
        .map(|c| if *c < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let mcc = correlations.iter().map(|c| c.abs()).sum::<f64>() / n as f64;
    Ok(RecoveryScore {
        amari_index: None,
        mcc,
        matching: Matching {
            permutation: perm,
            signs,
        },
        correlations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn amari_of_identity_and_signed_permutation() {
        assert_eq!(amari_index(&DMatrix::identity(3, 3)).unwrap(), 0.0);
        let p = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert_eq!(amari_index(&p).unwrap(), 0.0);
    }

    #[test]
    fn amari_frozen_values() {
        // values evaluated independently from the index formula
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!((amari_index(&a).unwrap() - 0.5).abs() < 1e-15);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 3.0]);
        assert!((amari_index(&b).unwrap() - 0.283_333_333_333_333_3).abs() < 1e-12);
        let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 1.0, 3.0, 1.0, 1.0, 1.0]);
        assert!((amari_index(&c).unwrap() - 0.472_222_222_222_222_15).abs() < 1e-12);
    }

    #[test]
    fn amari_rejects_bad_shapes() {
        assert!(amari_index(&DMatrix::zeros(2, 3)).is_err());
        assert!(amari_index(&DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn permutations_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_permutation(3, |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }

    fn random_sources(n: usize, k: usize, seed: u64) -> DMatrix<f64> {
        let mut r = rng::rng(seed);
        DMatrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut r))
    }

    #[test]
    fn mcc_identity_and_indeterminacies() {
        let s = random_sources(200, 3, 1);
        let score = mcc(&s, &s, MccMode::SignedLinear).unwrap();
        assert!((score.mcc - 1.0).abs() < 1e-12);
        assert_eq!(score.matching.permutation, vec![0, 1, 2]);

        let mut swapped = s.clone();
        swapped.swap_columns(0, 2);
        swapped.column_mut(1).neg_mut();
        let score = mcc(&swapped, &s, MccMode::SignedLinear).unwrap();
        assert!((score.mcc - 1.0).abs() < 1e-12);
        assert_eq!(score.matching.permutation, vec![2, 1, 0]);
        assert_eq!(score.matching.signs, vec![1.0, -1.0, 1.0]);

        let cubed = s.map(|v| v * v * v);
        let score = mcc(&cubed, &s, MccMode::AbsRank).unwrap();
        assert!((score.mcc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mcc_constant_column_errors() {
        let mut s = random_sources(10, 2, 2);
        let truth = s.clone();
        s.column_mut(1).fill(4.0);
        assert!(matches!(
            mcc(&s, &truth, MccMode::SignedLinear),
            Err(Error::UndefinedCorrelation {
                which: "estimated",
                column: 1
            })
        ));
    }

    #[test]
    fn greedy_assignment_above_limit_is_a_bijection() {
        let m = random_sources(10, 10, 3);
        let p = best_assignment(&m);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn amari_invariant_to_row_scaling_and_signed_permutation(
            seed in 0u64..10_000,
            n in 2usize..6,
            scales in proptest::collection::vec(0.1f64..10.0, 6),
            negate in proptest::collection::vec(any::<bool>(), 6),
        ) {
            let mut r = rng::rng(seed);
            let p = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut r));
            let base = amari_index(&p).unwrap();
            let perm = {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.rotate_left((seed as usize) % n);
                idx
            };
            let pi = DMatrix::from_fn(n, n, |i, j| {
                if perm[j] == i { if negate[j] { -1.0 } else { 1.0 } } else { 0.0 }
            });
            let d = DMatrix::from_fn(n, n, |i, j| if i == j { scales[i] * if negate[i] { -1.0 } else { 1.0 } } else { 0.0 });
            let moved = amari_index(&(d * &p * pi)).unwrap();
            prop_assert!((base - moved).abs() < 1e-10);
        }

        #[test]
        fn mcc_matching_is_a_bijection(seed in 0u64..10_000, k in 1usize..6) {
            let a = random_sources(20, k, seed);
            let b = random_sources(20, k, seed + 1);
            let s = mcc(&a, &b, MccMode::SignedLinear).unwrap();
            let mut p = s.matching.permutation.clone();
            p.sort_unstable();
            prop_assert_eq!(p, (0..k).collect::<Vec<_>>());
            prop_assert!(s.mcc >= 0.0 && s.mcc <= 1.0);
        }
    }
}
