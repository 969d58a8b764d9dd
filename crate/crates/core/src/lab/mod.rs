//! Numerical demonstrations of identifiability results and counterexamples.

mod evd;
mod isometry;
mod rotation;
mod symmetry;

pub use evd::{
    evd_check, evd_probe_points, EvdCheckReport, EvdProbe, EvdVerdict, LOG_DENSITY_SMOOTHING,
};
pub use isometry::{
    isometry_check, BuiltinMap, IsometryReport, IsometryVerdict, VectorMap, DEFAULT_FD_STEP,
};
pub use rotation::{
    energy_distance, gaussian_rotation_demo, gaussian_rotation_demo_with, RotationReport,
};
pub use symmetry::{bivariate_symmetry_demo, LaplaceContrast, SymmetryConfig, SymmetryReport};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;
use crate::independence::{hsic_test, TestConfig, TestReport};
use crate::stats;
use crate::synth::{
    darmois_construct, gen_linear_ica, LinearIcaOptions, SourceDistribution, SourceKind,
};

/// Default number of random probe points for the derivative checks.
pub const DEFAULT_PROBES: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DarmoisReport {
    pub n_samples: usize,
    pub ks_distance: f64,
    /// Independence test of `x1` against the constructed variable.
    pub independence: TestReport,
    /// Independence test of `x1` against `x2`, for contrast.
    pub observed_dependence: TestReport,
}

/// Mixes two Laplace sources, applies the conditional-CDF construction and
/// checks that the result is uniform and independent of `x1`.
pub fn darmois_demo(n_samples: usize, seed: u64, test_cfg: &TestConfig) -> Result<DarmoisReport> {
    let dist = SourceDistribution::new(SourceKind::Laplace);
    let (data, _) = gen_linear_ica(2, n_samples, dist, seed, LinearIcaOptions::default())?;
    demo_on(&data, test_cfg)
}

fn demo_on(data: &Dataset, test_cfg: &TestConfig) -> Result<DarmoisReport> {
    let z = darmois_construct(data)?;
    let x1 = data.column(0);
    Ok(DarmoisReport {
        n_samples: data.n_rows(),
        ks_distance: stats::ks_uniform(&z),
        independence: hsic_test(&x1, &z, test_cfg)?,
        observed_dependence: hsic_test(&x1, &data.column(1), test_cfg)?,
    })
}
