use identikit::experiments::nica_train_config;
use identikit::independence::hsic_test;
use identikit::lingam::fit_lingam;
use identikit::nica::TrainConfig;
use identikit::{estimate_ica, train_nica, IcaConfig, LingamConfig};
use serde_json::json;

use super::{column_index, parse_hidden, Run};
use crate::output::{versioned, Cell};
use crate::{CliResult, IcaArgs, IcaFlags, IndepArgs, LingamArgs, NicaArgs, TrainFlags};

fn ica_config(run: &mut Run, f: &IcaFlags) -> CliResult<IcaConfig> {
    let d = IcaConfig::default();
    Ok(IcaConfig {
        contrast: run.params.value("contrast", f.contrast, d.contrast)?,
        tol: run.params.value("tol", f.tol, d.tol)?,
        max_iter: run.params.value("max-iter", f.max_iter, d.max_iter)?,
        seed: run.seed,
    })
}

pub fn train_config(
    run: &mut Run,
    f: &TrainFlags,
    defaults: TrainConfig,
) -> CliResult<TrainConfig> {
    let hidden_default = defaults
        .hidden_widths
        .iter()
        .map(|w| w.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let p = &mut run.params;
    Ok(TrainConfig {
        learning_rate: p.value("learning-rate", f.learning_rate, defaults.learning_rate)?,
        momentum: p.value("momentum", f.momentum, defaults.momentum)?,
        batch_size: p.value("batch-size", f.batch_size, defaults.batch_size)?,
        epochs: p.value("epochs", f.epochs, defaults.epochs)?,
        seed: defaults.seed,
        hidden_widths: parse_hidden(&p.value("hidden", f.hidden.clone(), hidden_default)?)?,
        weight_decay: p.value("weight-decay", f.weight_decay, defaults.weight_decay)?,
    })
}

pub fn ica(run: &mut Run, a: IcaArgs) -> CliResult<()> {
    let data = run.read_input(&a.input)?;
    let cfg = ica_config(run, &a.ica)?;
    let fit = estimate_ica(&data, &cfg)?;
    run.out
        .dataset("components.csv", &data.with_values(fit.components.clone())?)?;
    run.out.json("ica.json", versioned(&fit)?)?;
    if run.plot {
        let rows: Vec<Vec<Cell>> = fit
            .contrast_trace
            .iter()
            .enumerate()
            .map(|(i, &c)| vec![Cell::Int(i as u64), Cell::Num(c)])
            .collect();
        run.out
            .table("contrast_trace.csv", &["step", "contrast"], &rows)?;
    }
    println!(
        "{} components, {} after {} iterations",
        fit.components.ncols(),
        if fit.converged {
            "converged"
        } else {
            "not converged"
        },
        fit.iterations
    );
    Ok(())
}

pub fn lingam(run: &mut Run, a: LingamArgs) -> CliResult<()> {
    let data = run.read_input(&a.input)?;
    let cfg = LingamConfig {
        ica: ica_config(run, &a.ica)?,
        prune_threshold: run.params.value(
            "prune-threshold",
            a.prune_threshold,
            LingamConfig::default().prune_threshold,
        )?,
    };
    let fit = fit_lingam(&data, &cfg)?;
    run.out.json("lingam.json", versioned(&fit)?)?;
    if run.plot {
        let rows: Vec<Vec<Cell>> = fit
            .model
            .edges()
            .into_iter()
            .map(|(from, to)| {
                vec![
                    Cell::Text(format!("x{}", from + 1)),
                    Cell::Text(format!("x{}", to + 1)),
                    Cell::Num(fit.model.b[(to, from)]),
                ]
            })
            .collect();
        run.out
            .table("edges.csv", &["parent", "child", "coefficient"], &rows)?;
    }
    let order: Vec<String> = fit
        .model
        .causal_order
        .iter()
        .map(|i| format!("x{}", i + 1))
        .collect();
    println!("causal order: {}", order.join(" < "));
    print!("{}", fit.model.adjacency_list());
    Ok(())
}

pub fn nica(run: &mut Run, a: NicaArgs) -> CliResult<()> {
    let data = run.read_input(&a.input)?;
    let cfg = train_config(run, &a.train, nica_train_config(run.seed))?;
    let fit = train_nica(&data, &cfg)?;
    run.out
        .dataset("components.csv", &data.with_values(fit.components.clone())?)?;
    run.out.json(
        "extractor.json",
        serde_json::from_str(&fit.extractor.to_json()?)?,
    )?;
    run.out.json(
        "nica.json",
        versioned(&json!({
            "classifier_accuracy": fit.classifier_accuracy,
            "n_segments": data.n_segments(),
            "loss_history": fit.loss_history,
            "linear_stage": fit.linear_stage,
            "warnings": fit.warnings,
        }))?,
    )?;
    if run.plot {
        let rows: Vec<Vec<Cell>> = fit
            .loss_history
            .iter()
            .enumerate()
            .map(|(e, &l)| vec![Cell::Int(e as u64 + 1), Cell::Num(l)])
            .collect();
        run.out.table("loss.csv", &["epoch", "loss"], &rows)?;
    }
    for w in &fit.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "segment classifier accuracy {} over {} segments",
        identikit::format_number(fit.classifier_accuracy),
        data.n_segments()
    );
    Ok(())
}

pub fn indep(run: &mut Run, a: IndepArgs) -> CliResult<()> {
    let data = run.read_input(&a.input)?;
    let xname = run.params.value("x", a.x.clone(), "x1".to_string())?;
    let yname = run.params.value("y", a.y.clone(), "x2".to_string())?;
    let (i, j) = (
        column_index(&xname, data.n_cols())?,
        column_index(&yname, data.n_cols())?,
    );
    let cfg = run.test_config(&a.test, 1)?;
    let report = hsic_test(&data.column(i), &data.column(j), &cfg)?;
    let mut doc = versioned(&report)?;
    doc["x"] = json!(xname);
    doc["y"] = json!(yname);
    run.out.json("indep.json", doc)?;
    println!(
        "HSIC {} p = {}: {}",
        identikit::format_number(report.statistic),
        identikit::format_number(report.p_value),
        if report.reject {
            "dependent"
        } else {
            "independence not rejected"
        }
    );
    Ok(())
}
