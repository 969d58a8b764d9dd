mod commands;
mod config;
mod manifest;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use identikit::discovery::BaseDensity;
use identikit::experiments::Suite;
use identikit::{Contrast, Method, SourceDistribution};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values or manifests: exit status 2.
    Usage(String),
    /// Precondition and data failures: exit status 1.
    Failure(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Failure(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "identikit",
    version,
    about = "Identifiable latent-variable models and causal discovery"
)]
pub struct Cli {
    /// Configuration file of `key = value` lines; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(short, long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Master seed [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Also write tidy CSV files for external plotting.
    #[arg(long, global = true)]
    pub emit_plot_data: bool,

    /// Re-run the command recorded in a manifest.json.
    #[arg(long, value_name = "FILE", conflicts_with = "config")]
    pub from_manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic dataset with its ground truth.
    Generate(GenerateArgs),
    /// Linear ICA by fixed-point iteration.
    Ica(IcaArgs),
    /// Linear non-Gaussian acyclic SEM estimation.
    Lingam(LingamArgs),
    /// Nonlinear ICA on segment-labelled data.
    Nica(NicaArgs),
    /// Bivariate causal direction.
    Discover(DiscoverArgs),
    /// HSIC permutation test between two columns.
    Indep(IndepArgs),
    /// Numerical identifiability demonstrations.
    #[command(subcommand)]
    Demo(DemoCommand),
    /// Repeated recovery experiment with per-trial metrics and a summary.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// linear-ica, signals, lingam, nica, anm, pnl, carefl or nonsens.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub vars: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Source or noise law: gaussian, laplace, uniform, gg:<shape>.
    #[arg(long)]
    pub dist: Option<SourceDistribution>,
    /// Law of the cause in bivariate models [default: gaussian].
    #[arg(long)]
    pub cause: Option<SourceDistribution>,
    #[arg(long)]
    pub edge_prob: Option<f64>,
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub segment_rows: Option<usize>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub cond_bound: Option<f64>,
    /// Equal modulation in every segment.
    #[arg(long)]
    pub stationary: bool,
    #[arg(long)]
    pub no_edge: bool,
    #[arg(long)]
    pub zero_alpha: bool,
    #[arg(long)]
    pub identity_post: bool,
}

#[derive(Debug, Args, Clone)]
pub struct IcaFlags {
    #[arg(long)]
    pub contrast: Option<Contrast>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IcaArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub ica: IcaFlags,
}

#[derive(Debug, Args)]
pub struct LingamArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub ica: IcaFlags,
    #[arg(long)]
    pub prune_threshold: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct TrainFlags {
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Comma-separated hidden layer widths, e.g. `32,32`.
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
}

#[derive(Debug, Args)]
pub struct NicaArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args, Clone)]
pub struct TestFlags {
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub method: Option<Method>,
    #[command(flatten)]
    pub test: TestFlags,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long)]
    pub bandwidth_factor: Option<f64>,
    #[arg(long)]
    pub flow_hidden: Option<usize>,
    #[arg(long)]
    pub flow_iterations: Option<usize>,
    #[arg(long)]
    pub flow_learning_rate: Option<f64>,
    #[arg(long)]
    pub flow_weight_decay: Option<f64>,
    #[arg(long)]
    pub base: Option<BaseDensity>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub split: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IndepArgs {
    pub input: PathBuf,
    /// First column [default: x1].
    #[arg(long)]
    pub x: Option<String>,
    /// Second column [default: x2].
    #[arg(long)]
    pub y: Option<String>,
    #[command(flatten)]
    pub test: TestFlags,
}

#[derive(Debug, Subcommand)]
pub enum DemoCommand {
    /// Gaussian likelihood is invariant to an orthogonal rotation.
    Rotation {
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Off-diagonal structure of the log-density Hessian.
    Evd {
        /// rotation, orthogonal or permutation.
        #[arg(long)]
        mixing: Option<String>,
        #[arg(long)]
        vars: Option<usize>,
        /// Rotation angle in degrees (two variables).
        #[arg(long)]
        angle: Option<f64>,
        #[arg(long)]
        dist: Option<SourceDistribution>,
        #[arg(long)]
        probes: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Jacobian checks of orthogonally affine maps.
    Isometry {
        /// orthogonal, scaled or tanh.
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long)]
        probes: Option<usize>,
        #[arg(long)]
        fd_step: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Conditional-CDF construction of a variable independent of x1.
    Darmois {
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        test: TestFlags,
    },
    /// Bivariate Gaussian regressions fit equally well in both directions.
    Symmetry {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        rho: Option<f64>,
        #[command(flatten)]
        test: TestFlags,
    },
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub suite: Suite,
    #[arg(long)]
    pub trials: Option<usize>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("IDENTIKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "IDENTIKIT_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    // a pool may already exist when run() is re-entered for a manifest
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let outcome = configure_threads().and_then(|_| commands::dispatch(cli));
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Failure(e)) => {
            eprintln!("error: {}", describe(&e));
            1
        }
    }
}

/// The error chain joined by `: `, skipping causes already quoted by the
/// message above them.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if msg.ends_with(&text) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&text);
    }
    msg
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(run(std::env::args_os()))
}
