use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error(
        "degenerate data: covariance eigenvalue {eigenvalue:e} (index {index}) is below the floor"
    )]
    DegenerateData { eigenvalue: f64, index: usize },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("undefined correlation: column {column} of the {which} matrix is constant")]
    UndefinedCorrelation { which: &'static str, column: usize },

    #[error("insufficient data: need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "near-singular diagonal: |w_{index}{index}| = {value:e} after the best row permutation"
    )]
    NearSingularDiagonal { index: usize, value: f64 },

    #[error("no row permutation gives a non-zero diagonal")]
    NoValidAssignment,

    #[error("graph is cyclic: no ordering makes the coefficient matrix strictly lower triangular")]
    CyclicGraph,

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
