//! End-to-end recovery and identifiability checks. Each test prints one
//! PASS/FAIL line before asserting.

use std::time::Instant;

use identikit::discovery::{
    discover_nonsens, nonsens_decision, AffineFlow, BaseDensity, Direction,
};
use identikit::experiments::{
    anm_linear_gaussian_trial, anm_trial, carefl_trial, gaussian_ica_trial, linear_ica_trial,
    lingam_trial, nica_trial, nonsens_train_config, nonsens_trial, NICA_SEGMENTS,
    NONSENS_LAMBDA_RANGE, NONSENS_SEGMENTS, NONSENS_SEGMENT_ROWS,
};
use identikit::independence::{hsic_test, TestConfig};
use identikit::lab::{
    darmois_demo, evd_check, evd_probe_points, gaussian_rotation_demo, isometry_check, BuiltinMap,
    EvdVerdict, IsometryVerdict, DEFAULT_FD_STEP,
};
use identikit::linalg;
use identikit::nica::{mlp_gradient, mlp_loss, FeatureExtractor};
use identikit::rng;
use identikit::stats;
use identikit::synth::{gen_nonsens_pair, SourceDistribution, SourceKind, TanhNet};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn verdict(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn rate(hits: usize, total: usize) -> f64 {
    hits as f64 / total as f64
}

#[test]
fn linear_ica_recovers_mixed_signals() {
    let mut amari = Vec::new();
    let mut slowest: f64 = 0.0;
    for seed in 0..20 {
        let start = Instant::now();
        amari.push(linear_ica_trial(seed).unwrap().amari_index);
        slowest = slowest.max(start.elapsed().as_secs_f64());
    }
    let median = stats::median(&amari);
    let pass = median < 0.05 && slowest < 5.0;
    verdict(
        "linear ICA recovery",
        pass,
        format!("median amari index {median:.4} (< 0.05), slowest run {slowest:.2}s (< 5s)"),
    );
    assert!(pass);
}

#[test]
fn gaussian_sources_are_unidentifiable() {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let r = gaussian_rotation_demo(2 + (seed as usize % 3), 2000, seed).unwrap();
        worst = worst.max(r.difference.abs());
    }
    let amari: Vec<f64> = (0..20)
        .map(|s| gaussian_ica_trial(s).unwrap().amari_index)
        .collect();
    let median = stats::median(&amari);
    let pass = worst < 1e-10 && median > 0.3;
    verdict(
        "gaussian unidentifiability",
        pass,
        format!("max rotation log-likelihood gap {worst:.2e} (< 1e-10), gaussian ICA median amari {median:.3} (> 0.3)"),
    );
    assert!(pass);
}

#[test]
fn lingam_recovers_order_and_coefficients() {
    let mut correct = 0;
    let mut total = 0;
    let mut max_err: f64 = 0.0;
    for n_vars in [2, 5] {
        for seed in 0..20 {
            let t = lingam_trial(n_vars, SourceKind::Laplace, seed).unwrap();
            correct += t.order_correct as usize;
            total += 1;
            max_err = max_err.max(t.max_b_error);
        }
    }
    let gaussian_hits = (0..20)
        .filter(|&s| {
            lingam_trial(2, SourceKind::Gaussian, 1000 + s)
                .unwrap()
                .order_correct
        })
        .count();
    let order_rate = rate(correct, total);
    let control = rate(gaussian_hits, 20);
    let pass = order_rate >= 0.9 && max_err < 0.1 && (control - 0.5).abs() <= 0.2;
    verdict(
        "LiNGAM",
        pass,
        format!(
            "exact order {order_rate:.2} (>= 0.90), max coefficient error {max_err:.4} (< 0.1), \
             gaussian control direction rate {control:.2} (0.5 +/- 0.2)"
        ),
    );
    assert!(pass);
}

#[test]
fn evd_structure_check() {
    let laplace = SourceDistribution::new(SourceKind::Laplace);
    let gauss = SourceDistribution::new(SourceKind::Gaussian);
    let gg1 = SourceDistribution::new(SourceKind::GeneralizedGaussian { shape: 1.0 });

    let perm = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    let p = evd_check(&perm, &laplace, &evd_probe_points(&perm, 20, 1), 1e-10).unwrap();
    let u = linalg::random_orthogonal(3, &mut rng::rng(2));
    let g = evd_check(&u, &gauss, &evd_probe_points(&u, 20, 2), 1e-10).unwrap();

    let c = std::f64::consts::FRAC_1_SQRT_2;
    let rot = DMatrix::from_row_slice(2, 2, &[c, -c, c, c]);
    let r = evd_check(&rot, &gg1, &evd_probe_points(&rot, 20, 3), 1e-10).unwrap();
    let informative: Vec<f64> = r
        .probes
        .iter()
        .filter(|pr| pr.spread > 0.1)
        .map(|pr| pr.offdiag)
        .collect();
    let rotated_residual = informative.iter().copied().fold(0.0, f64::max);

    let pass = p.offdiag_residual < 1e-10
        && p.verdict == EvdVerdict::SignedPermutation
        && g.offdiag_residual < 1e-10
        && g.verdict == EvdVerdict::DegenerateGaussian
        && !informative.is_empty()
        && rotated_residual > 0.1;
    verdict(
        "EVD structure check",
        pass,
        format!(
            "signed permutation residual {:.1e}, gaussian residual {:.1e} (< 1e-10); \
             45 degree rotation residual {rotated_residual:.3} over {} probes with spread > 0.1 (> 0.1)",
            p.offdiag_residual,
            g.offdiag_residual,
            informative.len()
        ),
    );
    assert!(pass);
}

#[test]
fn nonlinear_ica_recovers_sources() {
    let start = Instant::now();
    let trials: Vec<_> = (0..5).map(|s| nica_trial(s, false).unwrap()).collect();
    let mcc: Vec<f64> = trials.iter().map(|t| t.mcc).collect();
    let median = stats::median(&mcc);
    let controls: Vec<_> = (0..3).map(|s| nica_trial(100 + s, true).unwrap()).collect();
    let chance = 1.0 / NICA_SEGMENTS as f64;
    let control_mcc = controls.iter().map(|t| t.mcc).fold(0.0, f64::max);
    let control_acc_gap = controls
        .iter()
        .map(|t| (t.classifier_accuracy - chance).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = median >= 0.9 && control_mcc < 0.5 && control_acc_gap <= 0.02 && elapsed < 900.0;
    verdict(
        "nonlinear ICA",
        pass,
        format!(
            "median abs-rank MCC {median:.3} (>= 0.90); stationary control max MCC {control_mcc:.3} (< 0.5), \
             accuracy within {control_acc_gap:.4} of chance {chance:.3} (<= 0.02); {elapsed:.0}s (< 900s)"
        ),
    );
    assert!(pass);
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    diff / scale.max(1e-12)
}

#[test]
fn gradients_match_finite_differences() {
    let h = 1e-5;
    let mut worst_mlp: f64 = 0.0;
    for seed in 0..10u64 {
        let mut r = rng::rng(seed);
        let width = 2 + seed as usize % 4;
        let sizes = [3, width, 3];
        let mut ex = FeatureExtractor::new(&sizes, 4, &mut r).unwrap();
        let p0: Vec<f64> = ex
            .params()
            .iter()
            .map(|_| r.random::<f64>() - 0.5)
            .collect();
        ex.set_params(&p0);
        let batch = DMatrix::from_fn(8, 3, |_, _| 2.0 * r.random::<f64>() - 1.0);
        let labels: Vec<usize> = (0..8).map(|i| i % 4).collect();
        let analytic = mlp_gradient(&ex, &batch, &labels).unwrap().flatten();
        let mut numeric = vec![0.0; p0.len()];
        for (i, slot) in numeric.iter_mut().enumerate() {
            let mut p = p0.clone();
            p[i] += h;
            ex.set_params(&p);
            let up = mlp_loss(&ex, &batch, &labels).unwrap();
            p[i] -= 2.0 * h;
            ex.set_params(&p);
            let down = mlp_loss(&ex, &batch, &labels).unwrap();
            *slot = (up - down) / (2.0 * h);
        }
        ex.set_params(&p0);
        worst_mlp = worst_mlp.max(relative_error(&analytic, &numeric));
    }

    let mut r = rng::rng(77);
    let mut flow = AffineFlow {
        root_loc: 0.1,
        root_log_scale: -0.2,
        alpha: TanhNet::random(4, 1.0, 0.3, &mut r),
        beta: TanhNet::random(4, 1.0, 1.0, &mut r),
        base: BaseDensity::Laplace,
    };
    let cause: Vec<f64> = (0..30).map(|_| 2.0 * r.random::<f64>() - 1.0).collect();
    let effect: Vec<f64> = (0..30).map(|_| 2.0 * r.random::<f64>() - 1.0).collect();
    let (_, analytic) = flow.mean_log_likelihood_grad(&cause, &effect);
    let p0 = flow.params();
    let mut numeric = vec![0.0; p0.len()];
    for (i, slot) in numeric.iter_mut().enumerate() {
        let mut p = p0.clone();
        p[i] += h;
        flow.set_params(&p);
        let up = flow.mean_log_likelihood(&cause, &effect);
        p[i] -= 2.0 * h;
        flow.set_params(&p);
        let down = flow.mean_log_likelihood(&cause, &effect);
        *slot = (up - down) / (2.0 * h);
    }
    let flow_err = relative_error(&analytic, &numeric);
    let pass = worst_mlp < 1e-4 && flow_err < 1e-4;
    verdict(
        "gradient correctness",
        pass,
        format!(
            "network relative error {worst_mlp:.2e}, flow relative error {flow_err:.2e} (< 1e-4)"
        ),
    );
    assert!(pass);
}

#[test]
fn nonsens_orients_pairs() {
    let trials: Vec<_> = (0..20).map(|s| nonsens_trial(s).unwrap()).collect();
    let correct = trials.iter().filter(|t| t.correct).count();

    let mut antisymmetric = true;
    for seed in 0..2 {
        let p = gen_nonsens_pair(
            NONSENS_SEGMENTS,
            NONSENS_SEGMENT_ROWS,
            NONSENS_LAMBDA_RANGE,
            true,
            seed,
        )
        .unwrap();
        let cfg = nonsens_train_config(seed);
        let test = TestConfig::default();
        let a = discover_nonsens(&p.data, &cfg, &test).unwrap();
        let swapped = p.data.select_columns(&[1, 0]).unwrap();
        let b = discover_nonsens(&swapped, &cfg, &test).unwrap();
        antisymmetric &= b.direction == a.direction.swapped();
    }

    let mut table_ok = true;
    for bits in 0u8..16 {
        let reject = [
            [bits & 1 != 0, bits & 2 != 0],
            [bits & 4 != 0, bits & 8 != 0],
        ];
        let accepted: Vec<usize> = (0..2)
            .flat_map(|v| (0..2).filter(move |&k| !reject[v][k]).map(move |_| v))
            .collect();
        let expected = match accepted.as_slice() {
            [0] => Direction::X1ToX2,
            [1] => Direction::X2ToX1,
            a if a.len() == 4 => Direction::NoEdge,
            _ => Direction::Inconclusive,
        };
        table_ok &= nonsens_decision(reject) == expected;
    }

    let pass = rate(correct, 20) >= 0.9 && antisymmetric && table_ok;
    let verdicts: Vec<String> = trials.iter().map(|t| format!("{}", t.verdict)).collect();
    verdict(
        "NonSENS",
        pass,
        format!(
            "correct direction {correct}/20 (>= 18); column swap antisymmetric: {antisymmetric}; \
             16 rejection patterns: {table_ok}; verdicts [{}]",
            verdicts.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn anm_orients_nonlinear_pairs() {
    let correct = (0..20).filter(|&s| anm_trial(s).unwrap().correct).count();
    let inconclusive = (0..20)
        .filter(|&s| anm_linear_gaussian_trial(500 + s).unwrap().verdict == Direction::Inconclusive)
        .count();
    let pass = rate(correct, 20) >= 0.9 && rate(inconclusive, 20) >= 0.8;
    verdict(
        "ANM",
        pass,
        format!("correct direction {correct}/20 (>= 18); linear-gaussian inconclusive {inconclusive}/20 (>= 16)"),
    );
    assert!(pass);
}

#[test]
fn carefl_orients_affine_pairs() {
    let general = (0..20)
        .filter(|&s| carefl_trial(s, false).unwrap().correct)
        .count();
    let additive = (0..20)
        .filter(|&s| carefl_trial(300 + s, true).unwrap().correct)
        .count();
    let pass = rate(general, 20) >= 0.85 && rate(additive, 20) >= 0.85;
    verdict(
        "CAREFL",
        pass,
        format!("correct direction {general}/20, with alpha = 0 {additive}/20 (each >= 17)"),
    );
    assert!(pass);
}

#[test]
fn darmois_construction_is_independent_and_uniform() {
    let mut independent = 0;
    let mut worst_ks: f64 = 0.0;
    for seed in 0..20 {
        let cfg = TestConfig {
            seed: rng::derive(seed, 9),
            ..Default::default()
        };
        let r = darmois_demo(5000, seed, &cfg).unwrap();
        independent += (!r.independence.reject) as usize;
        worst_ks = worst_ks.max(r.ks_distance);
    }
    let pass = rate(independent, 20) >= 0.8 && worst_ks < 0.05;
    verdict(
        "Darmois construction",
        pass,
        format!("independence not rejected {independent}/20 (>= 16), max KS distance {worst_ks:.4} (< 0.05)"),
    );
    assert!(pass);
}

#[test]
fn hsic_is_calibrated() {
    let g = SourceDistribution::new(SourceKind::Gaussian);
    let l = SourceDistribution::new(SourceKind::Laplace);
    let mut rejections = 0;
    for seed in 0..200u64 {
        let x = g.sample_vec(100, &mut rng::child(seed, 0));
        let y = l.sample_vec(100, &mut rng::child(seed, 1));
        let cfg = TestConfig {
            n_permutations: 200,
            seed: rng::derive(seed, 2),
            ..Default::default()
        };
        rejections += hsic_test(&x, &y, &cfg).unwrap().reject as usize;
    }
    let type_one = rate(rejections, 200);
    let pass = (0.02..=0.09).contains(&type_one);
    verdict(
        "HSIC calibration",
        pass,
        format!("type-I error {type_one:.3} (in [0.02, 0.09])"),
    );
    assert!(pass);
}

#[test]
fn isometry_checker_separates_maps() {
    let mut r = rng::rng(12);
    let probes = DMatrix::from_fn(20, 3, |_, _| r.random::<f64>() * 2.0 - 1.0);
    let u = linalg::random_orthogonal(3, &mut r);
    let affine = BuiltinMap::Affine {
        matrix: u.clone(),
        offset: DVector::from_vec(vec![0.5, -1.0, 2.0]),
    };
    let a = isometry_check(&affine, &probes, DEFAULT_FD_STEP, 1e-6).unwrap();

    let t = isometry_check(&BuiltinMap::Tanh { dim: 3 }, &probes, DEFAULT_FD_STEP, 1e-6).unwrap();
    let predicted = probes
        .iter()
        .map(|&x| (1.0 - (1.0 / x.cosh()).powi(4)).abs())
        .fold(0.0, f64::max);

    let scaled = BuiltinMap::Affine {
        matrix: u * 2.0,
        offset: DVector::zeros(3),
    };
    let s = isometry_check(&scaled, &probes, DEFAULT_FD_STEP, 1e-6).unwrap();

    let pass = a.verdict == IsometryVerdict::OrthogonallyAffine
        && a.orthogonality_residual < 1e-6
        && a.second_derivative_residual < 1e-6
        && t.verdict == IsometryVerdict::NotIsometric
        && (t.orthogonality_residual - predicted).abs() < 1e-6
        && s.verdict == IsometryVerdict::NotIsometric
        && (s.orthogonality_residual - 3.0).abs() < 1e-6;
    verdict(
        "isometry checker",
        pass,
        format!(
            "orthogonal affine residuals {:.1e}/{:.1e} (< 1e-6); tanh residual {:.6} vs analytic {predicted:.6}; \
             scaled rotation residual {:.8} (3)",
            a.orthogonality_residual, a.second_derivative_residual, t.orthogonality_residual, s.orthogonality_residual
        ),
    );
    assert!(pass);
}
