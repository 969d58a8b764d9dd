use identikit::lab::{isometry_check, BuiltinMap, DEFAULT_FD_STEP};
use identikit::synth::gen_lingam;
use identikit::{
    estimate_lingam, Dataset, IcaConfig, LingamConfig, SourceDistribution, SourceKind,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn affine(dim: usize) -> impl Strategy<Value = (BuiltinMap, DMatrix<f64>)> {
    (
        prop::collection::vec(-2.0..2.0f64, dim * dim),
        prop::collection::vec(-1.0..1.0f64, dim),
        prop::collection::vec(-1.0..1.0f64, 3 * dim),
    )
        .prop_map(move |(m, b, p)| {
            (
                BuiltinMap::Affine {
                    matrix: DMatrix::from_row_slice(dim, dim, &m),
                    offset: DVector::from_vec(b),
                },
                DMatrix::from_row_slice(3, dim, &p),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_maps_have_no_curvature((f, probes) in (2usize..5).prop_flat_map(affine)) {
        let r = isometry_check(&f, &probes, DEFAULT_FD_STEP, 1e-6).unwrap();
        prop_assert!(r.second_derivative_residual < 1e-8, "{}", r.second_derivative_residual);
    }

    #[test]
    fn permuting_columns_permutes_the_order(seed in 0u64..1000) {
        let (data, _) = gen_lingam(3, 0.7, SourceDistribution::new(SourceKind::Laplace), 3000, seed).unwrap();
        let perm = [2usize, 0, 1];
        let permuted = data.select_columns(&perm).unwrap();
        let cfg = LingamConfig::default();
        let a = estimate_lingam(&data, &cfg).unwrap();
        let b = estimate_lingam(&permuted, &cfg).unwrap();
        let mapped: Vec<usize> = b.causal_order.iter().map(|&j| perm[j]).collect();
        prop_assert_eq!(mapped, a.causal_order);
    }

    #[test]
    fn rescaled_lingam_coefficients_transform(seed in 0u64..1000, s in 0.2..5.0f64) {
        let (data, _) = gen_lingam(2, 1.0, SourceDistribution::new(SourceKind::Laplace), 3000, seed).unwrap();
        let mut v = data.values().clone();
        v.column_mut(0).scale_mut(s);
        let cfg = LingamConfig {
            ica: IcaConfig { tol: 1e-12, max_iter: 2000, ..IcaConfig::default() },
            ..LingamConfig::default()
        };
        let a = estimate_lingam(&data, &cfg).unwrap();
        let b = estimate_lingam(&Dataset::new(v).unwrap(), &cfg).unwrap();
        // x2 = b21 x1 + e: scaling x1 by s divides b21 by s, and vice versa.
        // Exact up to where the fixed-point iteration stopped.
        let close = |u: f64, v: f64| (u - v).abs() <= 1e-3 * v.abs().max(1e-9);
        prop_assert!(close(b.b[(1, 0)], a.b[(1, 0)] / s), "{} vs {}", b.b[(1, 0)], a.b[(1, 0)] / s);
        prop_assert!(close(b.b[(0, 1)], a.b[(0, 1)] * s), "{} vs {}", b.b[(0, 1)], a.b[(0, 1)] * s);
    }
}
