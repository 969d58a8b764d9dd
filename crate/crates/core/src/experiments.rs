//! Recovery experiments shared by the acceptance tests and the `bench`
//! subcommand. Each trial is a pure function of its seed.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::discovery::{
    discover_anm, discover_carefl, discover_nonsens, BandwidthPolicy, CausalVerdict, Direction,
    FlowConfig,
};
use crate::error::{Error, Result};
use crate::ica::{estimate_ica, IcaConfig};
use crate::independence::TestConfig;
use crate::lingam::{estimate_lingam, LingamConfig};
use crate::metrics::{amari_index, mcc, MccMode};
use crate::nica::{classifier_accuracy, train_nica, TrainConfig};
use crate::synth::{
    gen_anm, gen_carefl, gen_lingam, gen_nonsens_pair, gen_nonstationary_nica, gen_signals,
    Activation, LinearIcaOptions, MlpFunction, NonstationarySpec, PairOptions, SourceDistribution,
    SourceKind,
};
use crate::{rng, stats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    LinearIca,
    Lingam,
    Nica,
    Nonsens,
    Anm,
    Carefl,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::LinearIca,
        Suite::Lingam,
        Suite::Nica,
        Suite::Nonsens,
        Suite::Anm,
        Suite::Carefl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::LinearIca => "linear-ica",
            Suite::Lingam => "lingam",
            Suite::Nica => "nica",
            Suite::Nonsens => "nonsens",
            Suite::Anm => "anm",
            Suite::Carefl => "carefl",
        }
    }

    /// Metric columns of one trial, in output order.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Suite::LinearIca => &["amari_index", "converged", "iterations"],
            Suite::Lingam => &["n_vars", "order_correct", "max_b_error"],
            Suite::Nica => &["mcc", "classifier_accuracy"],
            Suite::Nonsens | Suite::Anm => &["correct", "inconclusive"],
            Suite::Carefl => &["zero_alpha", "correct", "loglik_gap"],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::Parse(format!(
                    "unknown suite '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    /// Values for `Suite::columns`, in the same order.
    pub metrics: Vec<f64>,
    /// Wall-clock time; not part of the deterministic output.
    pub seconds: f64,
}

impl TrialRecord {
    pub fn metric(&self, suite: Suite, name: &str) -> Option<f64> {
        suite
            .columns()
            .iter()
            .position(|c| *c == name)
            .map(|i| self.metrics[i])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: String,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
}

/// Seed of trial `index` under `master_seed`.
pub fn trial_seed(master_seed: u64, index: usize) -> u64 {
    rng::derive(master_seed, index as u64)
}

pub fn run_trial(suite: Suite, index: usize, seed: u64) -> Result<TrialRecord> {
    let start = Instant::now();
    let metrics = match suite {
        Suite::LinearIca => {
            let t = linear_ica_trial(seed)?;
            vec![t.amari_index, flag(t.converged), t.iterations as f64]
        }
        Suite::Lingam => {
            let n_vars = if index % 2 == 0 { 2 } else { 5 };
            let t = lingam_trial(n_vars, SourceKind::Laplace, seed)?;
            vec![n_vars as f64, flag(t.order_correct), t.max_b_error]
        }
        Suite::Nica => {
            let t = nica_trial(seed, false)?;
            vec![t.mcc, t.classifier_accuracy]
        }
        Suite::Nonsens => {
            let t = nonsens_trial(seed)?;
            vec![flag(t.correct), flag(t.verdict == Direction::Inconclusive)]
        }
        Suite::Anm => {
            let t = anm_trial(seed)?;
            vec![flag(t.correct), flag(t.verdict == Direction::Inconclusive)]
        }
        Suite::Carefl => {
            let zero_alpha = index % 2 == 1;
            let t = carefl_trial(seed, zero_alpha)?;
            let gap = t.log_likelihoods.map_or(f64::NAN, |(f, b)| f - b);
            vec![flag(zero_alpha), flag(t.correct), gap]
        }
    };
    Ok(TrialRecord {
        index,
        seed,
        metrics,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs `trials` trials in parallel; results are ordered by trial index and
/// do not depend on scheduling.
pub fn run_suite(suite: Suite, trials: usize, master_seed: u64) -> Result<Vec<TrialRecord>> {
    (0..trials)
        .into_par_iter()
        .map(|i| run_trial(suite, i, trial_seed(master_seed, i)))
        .collect()
}

/// Median, quartiles and mean per metric column, ignoring NaN entries.
pub fn summarize(suite: Suite, records: &[TrialRecord]) -> Vec<SummaryRow> {
    suite
        .columns()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let vals: Vec<f64> = records
                .iter()
                .map(|r| r.metrics[j])
                .filter(|v| !v.is_nan())
                .collect();
            if vals.is_empty() {
                return SummaryRow {
                    metric: name.to_string(),
                    median: f64::NAN,
                    q1: f64::NAN,
                    q3: f64::NAN,
                    mean: f64::NAN,
                };
            }
            SummaryRow {
                metric: name.to_string(),
                median: stats::median(&vals),
                q1: stats::quantile(&vals, 0.25),
                q3: stats::quantile(&vals, 0.75),
                mean: stats::mean(&vals),
            }
        })
        .collect()
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct IcaTrial {
    pub amari_index: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Four mixed signals, 5000 samples.
pub fn linear_ica_trial(seed: u64) -> Result<IcaTrial> {
    let (data, model) = gen_signals(5000, seed, LinearIcaOptions::default())?;
    ica_recovery(&data, &model.mixing, seed)
}

/// Four mixed Gaussian sources: the rotation is not identifiable.
pub fn gaussian_ica_trial(seed: u64) -> Result<IcaTrial> {
    let (data, model) = crate::synth::gen_linear_ica(
        4,
        5000,
        SourceDistribution::new(SourceKind::Gaussian),
        seed,
        LinearIcaOptions::default(),
    )?;
    ica_recovery(&data, &model.mixing, seed)
}

fn ica_recovery(data: &Dataset, mixing: &DMatrix<f64>, seed: u64) -> Result<IcaTrial> {
    let cfg = IcaConfig {
        seed: rng::derive(seed, 100),
        ..Default::default()
    };
    let fit = estimate_ica(data, &cfg)?;
    Ok(IcaTrial {
        amari_index: amari_index(&(&fit.unmixing * mixing))?,
        converged: fit.converged,
        iterations: fit.iterations,
    })
}

#[derive(Debug, Clone)]
pub struct LingamTrial {
    pub order_correct: bool,
    pub max_b_error: f64,
    pub b_true: DMatrix<f64>,
    pub b_est: DMatrix<f64>,
}

/// Random SEM with 10 000 samples. Two variables always share an edge;
/// larger graphs have edge probability 0.5.
pub fn lingam_trial(n_vars: usize, noise: SourceKind, seed: u64) -> Result<LingamTrial> {
    let edge_prob = if n_vars == 2 { 1.0 } else { 0.5 };
    let (data, truth) = gen_lingam(
        n_vars,
        edge_prob,
        SourceDistribution::new(noise),
        10_000,
        seed,
    )?;
    let cfg = LingamConfig {
        ica: IcaConfig {
            seed: rng::derive(seed, 100),
            ..Default::default()
        },
        ..Default::default()
    };
    let est = estimate_lingam(&data, &cfg)?;
    let order_correct = order_consistent(&truth.b, &est.causal_order);
    let mut max_b_error: f64 = 0.0;
    for i in 0..n_vars {
        for j in 0..n_vars {
            if truth.b[(i, j)] != 0.0 && est.b[(i, j)] != 0.0 {
                max_b_error = max_b_error.max((truth.b[(i, j)] - est.b[(i, j)]).abs());
            }
        }
    }
    Ok(LingamTrial {
        order_correct,
        max_b_error,
        b_true: truth.b,
        b_est: est.b,
    })
}

/// True when no edge of `b` points backwards in `order`.
pub fn order_consistent(b: &DMatrix<f64>, order: &[usize]) -> bool {
    let mut position = vec![0; order.len()];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    (0..b.nrows()).all(|child| {
        (0..b.ncols()).all(|parent| b[(child, parent)] == 0.0 || position[parent] < position[child])
    })
}

#[derive(Debug, Clone)]
pub struct NicaTrial {
    pub mcc: f64,
    pub classifier_accuracy: f64,
}

pub const NICA_SEGMENTS: usize = 40;
pub const NICA_SEGMENT_ROWS: usize = 1000;

/// Training schedule used by the nonlinear ICA experiments.
pub fn nica_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 0.01,
        momentum: 0.9,
        batch_size: 128,
        epochs: 150,
        seed,
        hidden_widths: vec![32, 32],
        weight_decay: 1e-5,
    }
}

/// Two sources, two-layer leaky-relu mixer, 40 segments of 1000 rows. With
/// `stationary` every segment shares the same variances.
pub fn nica_trial(seed: u64, stationary: bool) -> Result<NicaTrial> {
    let spec = if stationary {
        NonstationarySpec::constant(2, NICA_SEGMENTS, NICA_SEGMENT_ROWS, 1.0)
    } else {
        NonstationarySpec::random(
            2,
            NICA_SEGMENTS,
            NICA_SEGMENT_ROWS,
            crate::synth::DEFAULT_LAMBDA_RANGE,
            seed,
        )
    };
    let mixer = MlpFunction::random(
        2,
        2,
        Activation::LeakyRelu { slope: 0.2 },
        5.0,
        rng::derive(seed, 50),
    )?;
    let gen = gen_nonstationary_nica(2, &spec, &mixer, seed)?;
    let fit = train_nica(&gen.data, &nica_train_config(rng::derive(seed, 101)))?;
    let score = mcc(&fit.components, &gen.sources, MccMode::AbsRank)?;
    Ok(NicaTrial {
        mcc: score.mcc,
        classifier_accuracy: classifier_accuracy(&fit.extractor, &gen.data)?,
    })
}

#[derive(Debug, Clone)]
pub struct DiscoveryTrial {
    pub truth: Direction,
    pub verdict: Direction,
    pub correct: bool,
    pub swapped: bool,
    pub log_likelihoods: Option<(f64, f64)>,
}

/// Presents the pair with columns in a seed-dependent order so that no
/// method can profit from the generator always putting the cause first.
fn shuffled_pair(
    data: &Dataset,
    truth: Direction,
    seed: u64,
) -> Result<(Dataset, Direction, bool)> {
    let swap = rng::child(seed, 200).random::<bool>();
    if swap {
        Ok((data.select_columns(&[1, 0])?, truth.swapped(), true))
    } else {
        Ok((data.clone(), truth, false))
    }
}

fn judged(truth: Direction, swapped: bool, v: &CausalVerdict) -> DiscoveryTrial {
    DiscoveryTrial {
        truth,
        verdict: v.direction,
        correct: v.direction == truth,
        swapped,
        log_likelihoods: v.log_likelihoods,
    }
}

pub const NONSENS_SEGMENTS: usize = 40;
pub const NONSENS_SEGMENT_ROWS: usize = 250;
pub const NONSENS_LAMBDA_RANGE: (f64, f64) = crate::synth::DEFAULT_LAMBDA_RANGE;

pub fn nonsens_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 100,
        ..nica_train_config(seed)
    }
}

pub fn nonsens_trial(seed: u64) -> Result<DiscoveryTrial> {
    let pair = gen_nonsens_pair(
        NONSENS_SEGMENTS,
        NONSENS_SEGMENT_ROWS,
        NONSENS_LAMBDA_RANGE,
        true,
        seed,
    )?;
    let (data, truth, swapped) = shuffled_pair(&pair.data, pair.direction, seed)?;
    let test = TestConfig {
        seed: rng::derive(seed, 102),
        ..Default::default()
    };
    let v = discover_nonsens(&data, &nonsens_train_config(rng::derive(seed, 101)), &test)?;
    Ok(judged(truth, swapped, &v))
}

fn anm_test_config(seed: u64) -> TestConfig {
    TestConfig {
        seed: rng::derive(seed, 102),
        ..Default::default()
    }
}

/// Sinusoidal mechanism with uniform noise, 1000 samples.
pub fn anm_trial(seed: u64) -> Result<DiscoveryTrial> {
    let pair = gen_anm(
        1000,
        SourceDistribution::new(SourceKind::Uniform),
        seed,
        PairOptions::default(),
    )?;
    let (data, truth, swapped) = shuffled_pair(&pair.data, pair.direction, seed)?;
    let v = discover_anm(&data, BandwidthPolicy::default(), &anm_test_config(seed))?;
    Ok(judged(truth, swapped, &v))
}

/// `x2 = 0.8 x1 + e` with Gaussian cause and noise: both directions admit
/// an additive noise model, so the expected verdict is inconclusive.
pub fn anm_linear_gaussian_trial(seed: u64) -> Result<DiscoveryTrial> {
    let g = SourceDistribution::new(SourceKind::Gaussian);
    let x1 = g.sample_vec(1000, &mut rng::child(seed, 3));
    let e = g.sample_vec(1000, &mut rng::child(seed, 1));
    let x2: Vec<f64> = x1.iter().zip(&e).map(|(a, e)| 0.8 * a + e).collect();
    let data = Dataset::from_columns(&[x1, x2])?;
    let (data, _, swapped) = shuffled_pair(&data, Direction::X1ToX2, seed)?;
    let v = discover_anm(&data, BandwidthPolicy::default(), &anm_test_config(seed))?;
    Ok(judged(Direction::Inconclusive, swapped, &v))
}

/// Affine flow pair with Laplace cause and noise, 2000 samples.
pub fn carefl_trial(seed: u64, zero_alpha: bool) -> Result<DiscoveryTrial> {
    let opts = PairOptions {
        cause: SourceDistribution::new(SourceKind::Laplace),
        zero_alpha,
        ..Default::default()
    };
    let pair = gen_carefl(
        2000,
        SourceDistribution::new(SourceKind::Laplace),
        seed,
        opts,
    )?;
    let (data, truth, swapped) = shuffled_pair(&pair.data, pair.direction, seed)?;
    let v = discover_carefl(&data, &FlowConfig::default(), 0.5, rng::derive(seed, 101))?;
    Ok(judged(truth, swapped, &v))
}
