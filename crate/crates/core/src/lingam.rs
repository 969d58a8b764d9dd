//! Linear non-Gaussian acyclic SEM estimation through linear ICA.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::ica::{estimate_ica, IcaConfig};
use crate::metrics::{best_assignment, for_each_permutation, EXHAUSTIVE_LIMIT};
use crate::{linalg, stats};

pub const DEFAULT_PRUNE_THRESHOLD: f64 = 0.05;

/// Smallest admissible `|w_ii|` after the row permutation.
pub const DIAGONAL_FLOOR: f64 = 1e-8;

/// `x = B x + e` with `b[(i, j)]` the effect of `x_j` on `x_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemModel {
    #[serde(with = "crate::json::matrix")]
    pub b: DMatrix<f64>,
    pub causal_order: Vec<usize>,
    pub disturbance_kurtosis: Vec<f64>,
    pub pruned: bool,
}

impl SemModel {
    /// Edges `(parent, child)` with non-zero coefficient.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.b.nrows();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.b[(i, j)] != 0.0 {
                    out.push((j, i));
                }
            }
        }
        out
    }

    /// One line per variable: `xi <- xj (coef), ...`.
    pub fn adjacency_list(&self) -> String {
        let n = self.b.nrows();
        let mut s = String::new();
        for i in 0..n {
            let parents: Vec<String> = (0..n)
                .filter(|&j| self.b[(i, j)] != 0.0)
                .map(|j| {
                    format!(
                        "x{} ({})",
                        j + 1,
                        crate::data::format_number(self.b[(i, j)])
                    )
                })
                .collect();
            s.push_str(&format!("x{} <- {}\n", i + 1, parents.join(", ")));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LingamConfig {
    pub ica: IcaConfig,
    /// Applied to coefficients of standardized variables.
    pub prune_threshold: f64,
}

impl Default for LingamConfig {
    fn default() -> Self {
        Self {
            ica: IcaConfig::default(),
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        }
    }
}

/// Estimate together with the intermediate quantities of the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LingamFit {
    pub model: SemModel,
    pub row_permutation: Vec<usize>,
    /// `|w_ii|` of the permuted unmixing matrix before rescaling.
    pub diagonal: Vec<f64>,
    /// Unpruned estimate.
    #[serde(with = "crate::json::matrix")]
    pub b_raw: DMatrix<f64>,
    pub ica_converged: bool,
}

pub fn estimate_lingam(data: &Dataset, cfg: &LingamConfig) -> Result<SemModel> {
    Ok(fit_lingam(data, cfg)?.model)
}

pub fn fit_lingam(data: &Dataset, cfg: &LingamConfig) -> Result<LingamFit> {
    let n = data.n_cols();
    if data.n_rows() < 50 * n {
        return Err(Error::InsufficientData {
            needed: 50 * n,
            got: data.n_rows(),
        });
    }
    let ica = estimate_ica(data, &cfg.ica)?;
    let perm = row_permutation_for_diagonal(&ica.unmixing)?;
    let mut w = linalg::permute_rows(&ica.unmixing, &perm);
    let diagonal: Vec<f64> = (0..n).map(|i| w[(i, i)].abs()).collect();
    if let Some((i, &v)) = diagonal
        .iter()
        .enumerate()
        .find(|(_, &v)| v < DIAGONAL_FLOOR)
    {
        return Err(Error::NearSingularDiagonal { index: i, value: v });
    }
    for i in 0..n {
        let d = w[(i, i)];
        let mut row = w.row_mut(i);
        row /= d;
        row[i] = 1.0;
    }
    assert!((0..n).all(|i| w[(i, i)] == 1.0));
    let mut b = DMatrix::identity(n, n) - w;
    b.fill_diagonal(0.0);

    let sd: Vec<f64> = (0..n).map(|j| stats::std_dev(&data.column(j))).collect();
    let standardized = DMatrix::from_fn(n, n, |i, j| b[(i, j)] * sd[j] / sd[i]);
    let order = order_minimizing_upper(&standardized);

    let b_raw = b.clone();
    for i in 0..n {
        for j in 0..n {
            if standardized[(i, j)].abs() < cfg.prune_threshold {
                b[(i, j)] = 0.0;
            }
        }
    }
    let pruned = is_strictly_lower(&b, &order);

    let e = data.values() * (DMatrix::identity(n, n) - &b).transpose();
    let disturbance_kurtosis = e
        .column_iter()
        .map(|c| stats::excess_kurtosis(c.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    Ok(LingamFit {
        model: SemModel {
            b,
            causal_order: order,
            disturbance_kurtosis,
            pruned,
        },
        row_permutation: perm,
        diagonal,
        b_raw,
        ica_converged: ica.converged,
    })
}

/// `perm` maximizing `prod_i |w[(perm[i], i)]|`, i.e. row `i` of the
/// permuted matrix is row `perm[i]` of `w`.
pub fn row_permutation_for_diagonal(w: &DMatrix<f64>) -> Result<Vec<usize>> {
    let n = w.nrows();
    linalg::shape_check(w, n, n, "W")?;
    let score = DMatrix::from_fn(n, n, |i, k| w[(k, i)].abs().ln());
    let perm = best_assignment(&score);
    if perm.iter().enumerate().any(|(i, &k)| w[(k, i)] == 0.0) {
        return Err(Error::NoValidAssignment);
    }
    Ok(perm)
}

fn upper_cost(b: &DMatrix<f64>, order: &[usize]) -> f64 {
    let mut s = 0.0;
    for (p, &i) in order.iter().enumerate() {
        for &j in &order[p + 1..] {
            s += b[(i, j)] * b[(i, j)];
        }
    }
    s
}

/// Variable order minimizing the squared mass that points from later to
/// earlier variables. Exhaustive up to `EXHAUSTIVE_LIMIT` variables,
/// otherwise repeatedly takes the variable with the smallest squared
/// coefficient mass on the remaining variables.
pub fn order_minimizing_upper(b: &DMatrix<f64>) -> Vec<usize> {
    let n = b.nrows();
    if n <= EXHAUSTIVE_LIMIT {
        let mut best = (f64::INFINITY, (0..n).collect::<Vec<_>>());
        for_each_permutation(n, |p| {
            let c = upper_cost(b, p);
            if c < best.0 {
                best = (c, p.to_vec());
            }
        });
        return best.1;
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &i)| {
                (
                    pos,
                    remaining
                        .iter()
                        .map(|&j| b[(i, j)] * b[(i, j)])
                        .sum::<f64>(),
                )
            })
            .fold(
                (0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
        order.push(remaining.remove(pos));
    }
    order
}

fn is_strictly_lower(b: &DMatrix<f64>, order: &[usize]) -> bool {
    order
        .iter()
        .enumerate()
        .all(|(p, &i)| order[p..].iter().all(|&j| b[(i, j)] == 0.0))
}

/// Lexicographically smallest order under which every coefficient from a
/// later to an earlier variable (and on the diagonal) is below `tol`.
pub fn causal_order(b: &DMatrix<f64>, tol: f64) -> Result<Vec<usize>> {
    let n = b.nrows();
    linalg::shape_check(b, n, n, "B")?;
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .find(|&i| !placed[i] && (0..n).all(|j| placed[j] && j != i || b[(i, j)].abs() < tol));
        let Some(i) = next else {
            return Err(Error::CyclicGraph);
        };
        placed[i] = true;
        order.push(i);
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn swap_rows_for_antidiagonal() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(row_permutation_for_diagonal(&w).unwrap(), vec![1, 0]);
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert_eq!(row_permutation_for_diagonal(&w).unwrap(), vec![0, 1]);
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            row_permutation_for_diagonal(&w),
            Err(Error::NoValidAssignment)
        ));
    }

    #[test]
    fn recovers_inverse_of_known_row_shuffle() {
        let mut r = rng::rng(4);
        for _ in 0..20 {
            let n = 5;
            let w = DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
                std::cmp::Ordering::Equal => 1.0,
                std::cmp::Ordering::Greater => r.random::<f64>() - 0.5,
                std::cmp::Ordering::Less => 0.0,
            });
            let mut sigma: Vec<usize> = (0..n).collect();
            sigma.shuffle(&mut r);
            let shuffled = linalg::permute_rows(&w, &sigma);
            let pi = row_permutation_for_diagonal(&shuffled).unwrap();
            for i in 0..n {
                assert_eq!(sigma[pi[i]], i);
            }
        }
    }

    #[test]
    fn causal_order_basic() {
        let b = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.1, 0.7, 0.0]);
        assert_eq!(causal_order(&b, 1e-12).unwrap(), vec![0, 1, 2]);
        let cyc = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        assert!(matches!(causal_order(&cyc, 1e-12), Err(Error::CyclicGraph)));
        assert_eq!(
            causal_order(&DMatrix::zeros(3, 3), 1e-12).unwrap(),
            vec![0, 1, 2]
        );
    }

    fn brute_force_order(b: &DMatrix<f64>, tol: f64) -> Option<Vec<usize>> {
        let mut found = None;
        for_each_permutation(b.nrows(), |p| {
            if found.is_none() {
                let ok = p
                    .iter()
                    .enumerate()
                    .all(|(k, &i)| p[k..].iter().all(|&j| b[(i, j)].abs() < tol));
                if ok {
                    found = Some(p.to_vec());
                }
            }
        });
        found
    }

    #[test]
    fn causal_order_matches_exhaustive_search() {
        let mut r = rng::rng(8);
        for _ in 0..200 {
            let mut shuffle: Vec<usize> = (0..4).collect();
            shuffle.shuffle(&mut r);
            let mut b = DMatrix::zeros(4, 4);
            for hi in 1..4 {
                for lo in 0..hi {
                    if r.random::<f64>() < 0.5 {
                        b[(shuffle[hi], shuffle[lo])] = 0.5;
                    }
                }
            }
            if r.random::<f64>() < 0.2 {
                // occasionally add a back edge to create a cycle
                b[(shuffle[0], shuffle[3])] = 0.4;
            }
            assert_eq!(causal_order(&b, 1e-12).ok(), brute_force_order(&b, 1e-12));
        }
    }

    #[test]
    fn full_chain_recovers_shuffle() {
        let mut r = rng::rng(2);
        let mut shuffle: Vec<usize> = (0..4).collect();
        shuffle.shuffle(&mut r);
        let mut b = DMatrix::zeros(4, 4);
        for hi in 1..4 {
            for lo in 0..hi {
                b[(shuffle[hi], shuffle[lo])] = 0.5;
            }
        }
        assert_eq!(causal_order(&b, 1e-12).unwrap(), shuffle);
    }

    #[test]
    fn greedy_order_on_large_triangular() {
        let n = 10;
        let b = DMatrix::from_fn(n, n, |i, j| if i > j { 0.5 } else { 0.0 });
        let rev: Vec<usize> = (0..n).rev().collect();
        let shuffled = linalg::permute_symmetric(&b, &rev);
        let order = order_minimizing_upper(&shuffled);
        assert_eq!(upper_cost(&shuffled, &order), 0.0);
    }

    #[test]
    fn adjacency_text() {
        let m = SemModel {
            b: DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.8, 0.0]),
            causal_order: vec![0, 1],
            disturbance_kurtosis: vec![3.0, 3.0],
            pruned: true,
        };
        assert_eq!(m.adjacency_list(), "x1 <- \nx2 <- x1 (0.8)\n");
        assert_eq!(m.edges(), vec![(0, 1)]);
    }
}
