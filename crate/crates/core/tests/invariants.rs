use std::collections::BTreeSet;

use identikit::discovery::{discover_anm, discover_carefl, BandwidthPolicy, FlowConfig};
use identikit::independence::{hsic_test, TestConfig};
use identikit::nica::train_extractor;
use identikit::synth::{
    gen_anm, gen_carefl, gen_linear_ica, gen_lingam, gen_nonstationary_nica, Activation,
    LinearIcaOptions, NonstationarySpec, PairOptions, DEFAULT_LAMBDA_RANGE,
};
use identikit::{
    amari_index, estimate_ica, estimate_lingam, mcc, rng, train_nica, Dataset, IcaConfig,
    LingamConfig, MccMode, MlpFunction, SourceDistribution, SourceKind, TrainConfig,
};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

fn laplace() -> SourceDistribution {
    SourceDistribution::new(SourceKind::Laplace)
}

fn signed_permutation(n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng::rng(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut r);
    let mut p = DMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        p[(i, j)] = if r.random::<bool>() { 1.0 } else { -1.0 };
    }
    p
}

#[test]
fn ica_is_equivariant_under_signed_permutation() {
    for seed in 0..5 {
        let (data, _) =
            gen_linear_ica(3, 5000, laplace(), seed, LinearIcaOptions::default()).unwrap();
        let p = signed_permutation(3, seed + 100);
        let permuted = Dataset::new(data.values() * p.transpose()).unwrap();
        let cfg = IcaConfig {
            seed,
            ..IcaConfig::default()
        };
        let plain = estimate_ica(&data, &cfg).unwrap();
        let other = estimate_ica(&permuted, &cfg).unwrap();
        // W' P A should be a scaled signed permutation
        let product = &other.unmixing * &p * &plain.mixing_est;
        let a = amari_index(&product).unwrap();
        assert!(a < 0.05, "seed {seed}: amari {a}");
    }
}

#[test]
fn lingam_order_survives_rescaling() {
    for seed in 0..10 {
        let (data, _) = gen_lingam(4, 0.5, laplace(), 5000, seed).unwrap();
        let cfg = LingamConfig::default();
        let base = estimate_lingam(&data, &cfg).unwrap();
        let mut scaled = data.values().clone();
        let factors = [3.0, 0.2, -1.5, 7.0];
        for (j, f) in factors.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*f);
        }
        let rescaled = estimate_lingam(&Dataset::new(scaled).unwrap(), &cfg).unwrap();
        assert_eq!(base.causal_order, rescaled.causal_order, "seed {seed}");
    }
}

#[test]
fn lingam_has_no_self_loops() {
    for seed in 0..10 {
        let (data, _) = gen_lingam(2 + (seed as usize % 4), 0.6, laplace(), 2000, seed).unwrap();
        let fit = estimate_lingam(&data, &LingamConfig::default()).unwrap();
        for i in 0..fit.b.nrows() {
            assert_eq!(fit.b[(i, i)], 0.0);
        }
    }
}

#[test]
fn lingam_edge_set_round_trip() {
    let mut hits = 0;
    for seed in 0..20u64 {
        let n = 2 + (seed as usize % 4);
        let (data, truth) = gen_lingam(n, 0.5, laplace(), 10_000, seed).unwrap();
        let fit = estimate_lingam(&data, &LingamConfig::default()).unwrap();
        let a: BTreeSet<_> = truth.edges().into_iter().collect();
        let b: BTreeSet<_> = fit.edges().into_iter().collect();
        if a == b {
            hits += 1;
        }
    }
    assert!(hits >= 18, "edge sets recovered in {hits}/20");
}

fn small_nica(seed: u64, segments: usize, rows: usize) -> (Dataset, DMatrix<f64>) {
    let spec = NonstationarySpec::random(2, segments, rows, DEFAULT_LAMBDA_RANGE, seed);
    let mixer = MlpFunction::random(
        2,
        2,
        Activation::LeakyRelu { slope: 0.2 },
        5.0,
        rng::derive(seed, 50),
    )
    .unwrap();
    let gen = gen_nonstationary_nica(2, &spec, &mixer, seed).unwrap();
    (gen.data, gen.sources)
}

#[test]
fn full_batch_loss_never_increases() {
    let (data, _) = small_nica(3, 10, 100);
    let cfg = TrainConfig {
        learning_rate: 1e-3,
        momentum: 0.0,
        batch_size: data.n_rows(),
        epochs: 40,
        seed: 1,
        hidden_widths: vec![8, 8],
        weight_decay: 0.0,
    };
    let (_, loss, _) = train_extractor(&data, &cfg).unwrap();
    for w in loss.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "loss rose from {} to {}", w[0], w[1]);
    }
}

#[test]
fn minibatch_loss_increases_are_rare() {
    let (data, _) = small_nica(4, 10, 200);
    let cfg = TrainConfig {
        learning_rate: 1e-3,
        momentum: 0.0,
        batch_size: 64,
        epochs: 60,
        seed: 2,
        hidden_widths: vec![8, 8],
        weight_decay: 0.0,
    };
    let (_, loss, _) = train_extractor(&data, &cfg).unwrap();
    let ups = loss.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(
        ups as f64 <= 0.05 * (loss.len() - 1) as f64,
        "{ups} increases in {} epochs",
        loss.len()
    );
}

fn quick_train(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 0.01,
        momentum: 0.9,
        batch_size: 128,
        epochs: 60,
        seed,
        hidden_widths: vec![16, 16],
        weight_decay: 1e-5,
    }
}

#[test]
fn segment_relabeling_gives_the_same_sources() {
    let (data, _) = small_nica(7, 20, 500);
    let labels = data.segment_labels().unwrap().to_vec();
    let mut perm: Vec<usize> = (0..20).collect();
    perm.shuffle(&mut rng::rng(70));
    let relabeled = data
        .clone()
        .with_segments(labels.iter().map(|&l| perm[l]).collect())
        .unwrap();
    let a = train_nica(&data, &quick_train(1)).unwrap();
    let b = train_nica(&relabeled, &quick_train(1)).unwrap();
    let score = mcc(&a.components, &b.components, MccMode::AbsRank).unwrap();
    assert!(score.mcc >= 0.98, "mutual mcc {}", score.mcc);
}

#[test]
fn more_segments_do_not_hurt() {
    let median = |segments: usize| {
        let mut v: Vec<f64> = (0..5u64)
            .map(|seed| {
                let (data, sources) = small_nica(seed, segments, 400);
                let fit = train_nica(&data, &quick_train(rng::derive(seed, 101))).unwrap();
                mcc(&fit.components, &sources, MccMode::AbsRank)
                    .unwrap()
                    .mcc
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v[2]
    };
    let (few, many) = (median(10), median(20));
    assert!(
        many >= few - 0.01,
        "median mcc {few} with 10 segments, {many} with 20"
    );
}

#[test]
fn hsic_p_values_are_super_uniform_under_independence() {
    let mut p: Vec<f64> = (0..500u64)
        .map(|seed| {
            let mut r = rng::child(seed, 0);
            let x: Vec<f64> = (0..100).map(|_| r.random::<f64>()).collect();
            let y: Vec<f64> = (0..100).map(|_| r.random::<f64>()).collect();
            let cfg = TestConfig {
                n_permutations: 200,
                alpha: 0.05,
                seed: rng::derive(seed, 1),
            };
            hsic_test(&x, &y, &cfg).unwrap().p_value
        })
        .collect();
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    // P(p <= q) - q, checked at every observed p where the ecdf jumps
    let excess = p
        .iter()
        .enumerate()
        .map(|(i, &v)| (i + 1) as f64 / n - v)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(excess < 0.05, "ecdf exceeds the uniform cdf by {excess}");
}

#[test]
fn anm_verdict_flips_with_columns() {
    let test = TestConfig {
        n_permutations: 200,
        ..TestConfig::default()
    };
    for seed in 0..4 {
        let pair = gen_anm(
            400,
            SourceDistribution::new(SourceKind::Uniform),
            seed,
            PairOptions::default(),
        )
        .unwrap();
        let swapped = pair.data.select_columns(&[1, 0]).unwrap();
        let a = discover_anm(&pair.data, BandwidthPolicy::default(), &test).unwrap();
        let b = discover_anm(&swapped, BandwidthPolicy::default(), &test).unwrap();
        assert_eq!(a.direction, b.direction.swapped());
        let pa: Vec<f64> = a.tests.iter().map(|t| t.report.p_value).collect();
        let pb: Vec<f64> = b.tests.iter().map(|t| t.report.p_value).collect();
        assert_eq!(pa, pb);
    }
}

#[test]
fn carefl_likelihoods_swap_exactly() {
    let cfg = FlowConfig {
        iterations: 200,
        ..FlowConfig::default()
    };
    for seed in 0..3 {
        let pair = gen_carefl(600, laplace(), seed, PairOptions::default()).unwrap();
        let swapped = pair.data.select_columns(&[1, 0]).unwrap();
        let a = discover_carefl(&pair.data, &cfg, 0.5, seed).unwrap();
        let b = discover_carefl(&swapped, &cfg, 0.5, seed).unwrap();
        assert_eq!(a.direction, b.direction.swapped());
        let (f, r) = a.log_likelihoods.unwrap();
        assert_eq!(b.log_likelihoods, Some((r, f)));
    }
}
