use identikit::rng;
use identikit::synth::{
    gen_anm, gen_carefl, gen_linear_ica, gen_lingam, gen_nonsens_pair, gen_nonstationary_nica,
    gen_pnl, gen_signals, Activation, LinearIcaOptions, MlpFunction, NonstationarySpec,
    PairOptions, SourceDistribution, SourceKind, DEFAULT_CONDITION_BOUND, DEFAULT_LAMBDA_RANGE,
};
use identikit::Dataset;
use serde_json::json;

use super::Run;
use crate::output::versioned;
use crate::{CliError, CliResult, GenerateArgs};

const MODELS: &str = "linear-ica|signals|lingam|nica|anm|pnl|carefl|nonsens";

pub fn run(run: &mut Run, a: GenerateArgs) -> CliResult<()> {
    let model = run
        .params
        .value("model", a.model.clone(), "linear-ica".to_string())?;
    let seed = run.seed;
    let p = &mut run.params;
    let laplace = SourceDistribution::new(SourceKind::Laplace);
    let truth = match model.as_str() {
        "linear-ica" | "signals" => {
            let samples = p.value("samples", a.samples, 5000)?;
            let opts = LinearIcaOptions {
                cond_bound: p.value("cond-bound", a.cond_bound, DEFAULT_CONDITION_BOUND)?,
                ..Default::default()
            };
            let (data, mixing, dist) = if model == "signals" {
                let (d, m) = gen_signals(samples, seed, opts)?;
                (d, m, "signals".to_string())
            } else {
                let vars = p.value("vars", a.vars, 4)?;
                let dist = p.value("dist", a.dist, laplace)?;
                let (d, m) = gen_linear_ica(vars, samples, dist, seed, opts)?;
                (d, m, dist.to_string())
            };
            run.out.dataset("data.csv", &data)?;
            if let Some(s) = &mixing.sources {
                run.out.dataset("sources.csv", &Dataset::new(s.clone())?)?;
            }
            let mut t = versioned(&mixing)?;
            t["model"] = json!(model);
            t["sources"] = json!(dist);
            t["sources_path"] = json!("sources.csv");
            t
        }
        "lingam" => {
            let vars = p.value("vars", a.vars, 3)?;
            let samples = p.value("samples", a.samples, 5000)?;
            let edge_prob = p.value("edge-prob", a.edge_prob, 0.5)?;
            let dist = p.value("dist", a.dist, laplace)?;
            let (data, sem) = gen_lingam(vars, edge_prob, dist, samples, seed)?;
            run.out.dataset("data.csv", &data)?;
            let mut t = versioned(&sem)?;
            t["model"] = json!(model);
            t["noise"] = json!(dist.to_string());
            t
        }
        "nica" => {
            let vars = p.value("vars", a.vars, 2)?;
            let segments = p.value("segments", a.segments, 40)?;
            let rows = p.value("segment-rows", a.segment_rows, 1000)?;
            let layers = p.value("layers", a.layers, 2)?;
            let cond = p.value("cond-bound", a.cond_bound, 5.0)?;
            let stationary = p.switch("stationary", a.stationary)?;
            let spec = if stationary {
                NonstationarySpec::constant(vars, segments, rows, 1.0)
            } else {
                let lo = p.value("lambda-min", a.lambda_min, DEFAULT_LAMBDA_RANGE.0)?;
                let hi = p.value("lambda-max", a.lambda_max, DEFAULT_LAMBDA_RANGE.1)?;
                NonstationarySpec::random(vars, segments, rows, (lo, hi), seed)
            };
            let mixer = MlpFunction::random(
                vars,
                layers,
                Activation::LeakyRelu { slope: 0.2 },
                cond,
                rng::derive(seed, 50),
            )?;
            let gen = gen_nonstationary_nica(vars, &spec, &mixer, seed)?;
            run.out.dataset("data.csv", &gen.data)?;
            run.out.dataset(
                "sources.csv",
                &Dataset::new(gen.sources)?
                    .with_segments(gen.data.segment_labels().unwrap_or_default().to_vec())?,
            )?;
            versioned(&json!({
                "model": model,
                "spec": spec,
                "mixer": mixer,
                "sources_path": "sources.csv",
                "warnings": gen.warnings,
            }))?
        }
        "anm" | "pnl" | "carefl" => {
            let carefl = model == "carefl";
            let samples = p.value("samples", a.samples, if carefl { 2000 } else { 1000 })?;
            let noise_default = if carefl {
                laplace
            } else {
                SourceDistribution::new(SourceKind::Uniform)
            };
            let noise = p.value("dist", a.dist, noise_default)?;
            let cause_default = if carefl {
                laplace
            } else {
                SourceDistribution::new(SourceKind::Gaussian)
            };
            let mut opts = PairOptions {
                cause: p.value("cause", a.cause, cause_default)?,
                no_edge: p.switch("no-edge", a.no_edge)?,
                ..Default::default()
            };
            let pair = match model.as_str() {
                "anm" => gen_anm(samples, noise, seed, opts)?,
                "pnl" => {
                    opts.identity_post = p.switch("identity-post", a.identity_post)?;
                    gen_pnl(samples, noise, seed, opts)?
                }
                _ => {
                    opts.zero_alpha = p.switch("zero-alpha", a.zero_alpha)?;
                    gen_carefl(samples, noise, seed, opts)?
                }
            };
            run.out.dataset("data.csv", &pair.data)?;
            versioned(&json!({
                "model": model,
                "direction": pair.direction,
                "mechanism": pair.mechanism,
                "noise": noise.to_string(),
                "cause": opts.cause.to_string(),
            }))?
        }
        "nonsens" => {
            let segments = p.value("segments", a.segments, 40)?;
            let rows = p.value("segment-rows", a.segment_rows, 250)?;
            let lo = p.value("lambda-min", a.lambda_min, DEFAULT_LAMBDA_RANGE.0)?;
            let hi = p.value("lambda-max", a.lambda_max, DEFAULT_LAMBDA_RANGE.1)?;
            let no_edge = p.switch("no-edge", a.no_edge)?;
            let pair = gen_nonsens_pair(segments, rows, (lo, hi), !no_edge, seed)?;
            run.out.dataset("data.csv", &pair.data)?;
            run.out
                .dataset("disturbances.csv", &Dataset::new(pair.disturbances)?)?;
            versioned(&json!({
                "model": model,
                "direction": pair.direction,
                "spec": pair.spec,
                "mixer": pair.mixer,
                "disturbances_path": "disturbances.csv",
                "warnings": pair.warnings,
            }))?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown model `{other}` ({MODELS})"
            )))
        }
    };
    run.out.json("truth.json", truth)?;
    println!(
        "wrote {} to {}",
        run.out.written.join(", "),
        run.out.dir.display()
    );
    Ok(())
}
