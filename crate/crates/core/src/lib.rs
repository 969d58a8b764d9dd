//! Identifiable latent-variable models and causal discovery: linear ICA,
//! LiNGAM, nonlinear ICA from nonstationary data, bivariate direction
//! discovery, and numerical identifiability checks.

pub mod data;
pub mod discovery;
pub mod error;
pub mod experiments;
pub mod ica;
pub mod independence;
pub mod json;
pub mod lab;
pub mod linalg;
pub mod lingam;
pub mod metrics;
pub mod nica;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod whiten;

pub use data::{format_number, Dataset};
pub use discovery::{CausalVerdict, Direction, Method};
pub use error::{Error, Result};
pub use ica::{estimate_ica, nongaussianity, Contrast, IcaConfig, IcaResult};
pub use independence::{hsic_statistic, hsic_test, median_heuristic, TestConfig, TestReport};
pub use lingam::{
    causal_order, estimate_lingam, row_permutation_for_diagonal, LingamConfig, SemModel,
};
pub use metrics::{amari_index, mcc, MccMode, RecoveryScore};
pub use nica::{mlp_forward, mlp_gradient, train_nica, FeatureExtractor, NicaResult, TrainConfig};
pub use synth::{
    LinearMixingModel, MlpFunction, NonstationarySpec, SourceDistribution, SourceKind,
};
pub use whiten::{whiten, WhiteningResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
