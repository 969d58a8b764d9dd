use identikit::discovery::{
    discover_anm, discover_carefl, discover_nonsens, BandwidthPolicy, FlowConfig,
};
use identikit::experiments::nonsens_train_config;
use identikit::{rng, Method};

use super::analyze::train_config;
use super::Run;
use crate::output::versioned;
use crate::{CliResult, DiscoverArgs};

pub fn run(run: &mut Run, a: DiscoverArgs) -> CliResult<()> {
    let mut data = run.read_input(&a.input)?;
    let method = run.params.value("method", a.method, Method::Anm)?;
    let test = run.test_config(&a.test, 1)?;
    let verdict = match method {
        Method::Nonsens => {
            let cfg = train_config(
                run,
                &a.train,
                nonsens_train_config(rng::derive(run.seed, 0)),
            )?;
            if data.segment_labels().is_none() {
                // no segment column: one stationary segment
                let rows = data.n_rows();
                data = data.with_segments(vec![0; rows])?;
            }
            discover_nonsens(&data, &cfg, &test)?
        }
        Method::Anm => {
            let policy = BandwidthPolicy {
                factor: run.params.value(
                    "bandwidth-factor",
                    a.bandwidth_factor,
                    BandwidthPolicy::default().factor,
                )?,
            };
            discover_anm(&data, policy, &test)?
        }
        Method::Carefl => {
            let d = FlowConfig::default();
            let p = &mut run.params;
            let cfg = FlowConfig {
                hidden: p.value("flow-hidden", a.flow_hidden, d.hidden)?,
                iterations: p.value("flow-iterations", a.flow_iterations, d.iterations)?,
                learning_rate: p.value(
                    "flow-learning-rate",
                    a.flow_learning_rate,
                    d.learning_rate,
                )?,
                weight_decay: p.value("flow-weight-decay", a.flow_weight_decay, d.weight_decay)?,
                base: p.value("base", a.base, d.base)?,
                margin: p.value("margin", a.margin, d.margin)?,
            };
            let split = p.value("split", a.split, 0.5)?;
            discover_carefl(&data, &cfg, split, rng::derive(run.seed, 0))?
        }
    };
    run.out.json("verdict.json", versioned(&verdict)?)?;
    println!("direction: {}", verdict.direction);
    if let Some((fwd, bwd)) = verdict.log_likelihoods {
        println!(
            "held-out log-likelihood: x1->x2 {}, x2->x1 {}",
            identikit::format_number(fwd),
            identikit::format_number(bwd)
        );
    }
    for t in &verdict.tests {
        println!(
            "  x{} vs {}: p = {}{}",
            t.observed + 1,
            t.against,
            identikit::format_number(t.report.p_value),
            if t.report.reject { " (rejected)" } else { "" }
        );
    }
    if !verdict.confidence_note.is_empty() {
        println!("note: {}", verdict.confidence_note);
    }
    Ok(())
}
