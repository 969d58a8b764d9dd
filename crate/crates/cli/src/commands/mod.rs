mod analyze;
mod bench;
mod demo;
mod discover;
mod generate;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::Parser;
use identikit::independence::TestConfig;
use identikit::{rng, Dataset};

use crate::config::{self, Params};
use crate::manifest::RunManifest;
use crate::output::{Outputs, FORMAT_VERSION};
use crate::{Cli, CliError, CliResult, Command, TestFlags};

/// State shared by every subcommand of one invocation.
pub struct Run {
    pub params: Params,
    pub seed: u64,
    pub plot: bool,
    pub arguments: Vec<String>,
    pub inputs: Vec<String>,
    pub out: Outputs,
}

impl Run {
    pub fn read_input(&mut self, path: &Path) -> CliResult<Dataset> {
        let shown = path.display().to_string();
        self.arguments.push(shown.clone());
        self.inputs.push(shown);
        let data = Dataset::read_csv(path)
            .with_context(|| format!("cannot load dataset {}", path.display()))?;
        Ok(data)
    }

    pub fn test_config(&mut self, flags: &TestFlags, stream: u64) -> CliResult<TestConfig> {
        let d = TestConfig::default();
        Ok(TestConfig {
            n_permutations: self.params.value(
                "permutations",
                flags.permutations,
                d.n_permutations,
            )?,
            alpha: self.params.value("alpha", flags.alpha, d.alpha)?,
            seed: rng::derive(self.seed, stream),
        })
    }
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    let Some(path) = cli.from_manifest.clone() else {
        return execute(cli);
    };
    if cli.command.is_some() {
        return Err(CliError::Usage(
            "--from-manifest cannot be combined with a subcommand".into(),
        ));
    }
    let manifest = RunManifest::read(&path)?;
    let argv = manifest.replay_argv(cli.out.clone())?;
    let replay = Cli::try_parse_from(argv).map_err(|e| {
        CliError::Usage(format!(
            "manifest {} does not describe a valid run: {e}",
            path.display()
        ))
    })?;
    execute(replay)
}

fn execute(cli: Cli) -> CliResult<()> {
    let Some(command) = cli.command else {
        return Err(CliError::Usage(
            "a subcommand is required (see --help)".into(),
        ));
    };
    let file = match &cli.config {
        Some(p) => config::load(p)?,
        None => BTreeMap::new(),
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut params = Params::new(file);
    let seed = params.value("seed", cli.seed, 0u64)?;
    let plot = params.switch("emit-plot-data", cli.emit_plot_data)?;
    params.mark_used("out");
    let mut run = Run {
        params,
        seed,
        plot,
        arguments: Vec::new(),
        inputs: Vec::new(),
        out: Outputs::create(out_dir)?,
    };

    let start = Instant::now();
    let subcommand = match command {
        Command::Generate(a) => generate::run(&mut run, a).map(|_| "generate".to_string()),
        Command::Ica(a) => analyze::ica(&mut run, a).map(|_| "ica".to_string()),
        Command::Lingam(a) => analyze::lingam(&mut run, a).map(|_| "lingam".to_string()),
        Command::Nica(a) => analyze::nica(&mut run, a).map(|_| "nica".to_string()),
        Command::Indep(a) => analyze::indep(&mut run, a).map(|_| "indep".to_string()),
        Command::Discover(a) => discover::run(&mut run, a).map(|_| "discover".to_string()),
        Command::Demo(d) => demo::run(&mut run, d).map(|name| format!("demo {name}")),
        Command::Bench(a) => bench::run(&mut run, a).map(|_| "bench".to_string()),
    }?;
    let duration = start.elapsed().as_secs_f64();

    for key in run.params.unused_keys() {
        log::warn!("config key `{key}` is not used by `{subcommand}`");
    }
    let manifest = RunManifest {
        format_version: FORMAT_VERSION,
        subcommand,
        arguments: run.arguments,
        params: run.params.into_resolved(),
        seed,
        inputs: run.inputs,
        output_dir: run.out.dir.display().to_string(),
        outputs: run.out.written.clone(),
        version: identikit::VERSION.to_string(),
        duration_seconds: duration,
    };
    run.out
        .json("manifest.json", serde_json::to_value(&manifest)?)?;
    Ok(())
}

pub fn parse_hidden(spec: &str) -> CliResult<Vec<usize>> {
    if spec.trim().is_empty() || spec.trim() == "auto" {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| CliError::Usage(format!("--hidden: `{w}` is not a positive width")))
        })
        .collect()
}

/// `x3` -> 2.
pub fn column_index(name: &str, n_cols: usize) -> CliResult<usize> {
    let idx = name
        .trim()
        .strip_prefix('x')
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&i| i >= 1)
        .ok_or_else(|| CliError::Usage(format!("column `{name}` must be named x1..xn")))?;
    if idx > n_cols {
        return Err(CliError::Failure(anyhow::anyhow!(
            "column {name} does not exist: the dataset has {n_cols} variables"
        )));
    }
    Ok(idx - 1)
}
