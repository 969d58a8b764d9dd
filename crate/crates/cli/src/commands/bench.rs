use identikit::experiments::{run_suite, summarize};

use super::Run;
use crate::output::Cell;
use crate::{BenchArgs, CliResult};

pub fn run(run: &mut Run, a: BenchArgs) -> CliResult<()> {
    let suite = a.suite;
    run.arguments.push(suite.to_string());
    let trials = run.params.value("trials", a.trials, 20)?;
    let records = run_suite(suite, trials, run.seed)?;
    let summary = summarize(suite, &records);

    let mut header = vec!["trial", "seed"];
    header.extend_from_slice(suite.columns());
    let rows: Vec<Vec<Cell>> = records
        .iter()
        .map(|r| {
            let mut row = vec![Cell::Int(r.index as u64), Cell::Int(r.seed)];
            row.extend(r.metrics.iter().map(|&m| Cell::Num(m)));
            row
        })
        .collect();
    run.out.table("trials.csv", &header, &rows)?;

    let rows: Vec<Vec<Cell>> = summary
        .iter()
        .map(|s| {
            vec![
                Cell::Text(s.metric.clone()),
                Cell::Num(s.median),
                Cell::Num(s.q1),
                Cell::Num(s.q3),
                Cell::Num(s.q3 - s.q1),
                Cell::Num(s.mean),
            ]
        })
        .collect();
    run.out.table(
        "summary.csv",
        &["metric", "median", "q1", "q3", "iqr", "mean"],
        &rows,
    )?;

    let seconds: f64 = records.iter().map(|r| r.seconds).sum();
    println!("{suite}: {trials} trials, {seconds:.1} s of trial time");
    println!(
        "{:<22} {:>14} {:>14} {:>14}",
        "metric", "median", "q1", "q3"
    );
    for s in &summary {
        println!(
            "{:<22} {:>14} {:>14} {:>14}",
            s.metric,
            identikit::format_number(s.median),
            identikit::format_number(s.q1),
            identikit::format_number(s.q3)
        );
    }
    Ok(())
}
