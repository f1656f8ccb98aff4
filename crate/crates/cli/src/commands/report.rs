use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use emq_core::search::HistoryRow;
use serde::Serialize;

use super::emit;
use super::eval::{read_csv, summarize, write_csv, EvalRow};
use crate::args::ReportArgs;
use crate::manifest::{write_file, ManifestBuilder};
use crate::CliError;

#[derive(Serialize)]
struct ReportConfig {
    evals: Vec<String>,
    histories: Vec<String>,
}

#[derive(Serialize)]
struct RejectionRow {
    run: String,
    sampled: u64,
    evaluated: u64,
    conflict: u64,
    invalid: u64,
    insensitive: u64,
    duplicate: u64,
}

#[derive(Serialize)]
struct EvolutionRow {
    run: String,
    generations: usize,
    population_size: usize,
    initial_best: f64,
    final_best: f64,
    final_mean: f64,
    elitist: bool,
}

/// A history argument names either an evolve output directory or the CSV itself.
fn history_file(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("history.csv")
    } else {
        p.to_path_buf()
    }
}

fn load_history(path: &Path) -> Result<Vec<HistoryRow>, CliError> {
    let rows: Vec<HistoryRow> = read_csv(path)?;
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: history has no rows", path.display())));
    }
    Ok(rows)
}

fn fmt(x: f64) -> String {
    format!("{x:.4}")
}

pub fn run(a: ReportArgs) -> Result<(), CliError> {
    if a.evals.is_empty() && a.histories.is_empty() {
        return Err(CliError::Input("nothing to report: give --eval and/or --history".into()));
    }
    let config = ReportConfig {
        evals: a.evals.iter().map(|p| p.display().to_string()).collect(),
        histories: a.histories.iter().map(|p| p.display().to_string()).collect(),
    };
    let mut manifest = ManifestBuilder::new("report", &config);

    let mut eval_rows: Vec<EvalRow> = Vec::new();
    for p in &a.evals {
        manifest.input(p);
        eval_rows.extend(read_csv::<EvalRow>(p)?);
    }
    let mut rejections = Vec::new();
    let mut evolution = Vec::new();
    for p in &a.histories {
        let file = history_file(p);
        manifest.input(&file);
        let rows = load_history(&file)?;
        let run = p.display().to_string();
        let last = rows.last().expect("non-empty");
        rejections.push(RejectionRow {
            run: run.clone(),
            sampled: last.sampled_count,
            evaluated: last.evaluated_count,
            conflict: last.rejected_conflict,
            invalid: last.rejected_invalid,
            insensitive: last.rejected_insensitive,
            duplicate: last.rejected_duplicate,
        });
        evolution.push(EvolutionRow {
            run,
            generations: last.generation,
            population_size: last.population_size,
            initial_best: rows[0].best_fitness,
            final_best: last.best_fitness,
            final_mean: last.mean_fitness,
            elitist: rows.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness)
                && rows.iter().all(|r| r.population_size == rows[0].population_size),
        });
    }
    let summary = summarize(&eval_rows);

    let dir = &a.out_dir;
    let mut md = String::from("# EMQ report\n");
    if !summary.is_empty() {
        md.push_str("\n## Rank correlation on the test split\n\n| proxy | metric | mean | std | runs |\n|---|---|---|---|---|\n");
        for s in &summary {
            let _ = writeln!(md, "| {} | {} | {} | {} | {} |", s.proxy, s.metric, fmt(s.mean), fmt(s.std), s.runs);
        }
        let path = dir.join("eval_summary.csv");
        write_csv(&path, &summary)?;
        manifest.output(&path);
    }
    if !evolution.is_empty() {
        md.push_str("\n## Evolution\n\n| run | generations | population | initial best | final best | final mean | elitist |\n|---|---|---|---|---|---|---|\n");
        for e in &evolution {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} | {} |",
                e.run,
                e.generations,
                e.population_size,
                fmt(e.initial_best),
                fmt(e.final_best),
                fmt(e.final_mean),
                if e.elitist { "yes" } else { "no" }
            );
        }
        md.push_str("\n## Screening rejections\n\n| run | sampled | evaluated | conflict | invalid | insensitive | duplicate |\n|---|---|---|---|---|---|---|\n");
        for r in &rejections {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} | {} |",
                r.run, r.sampled, r.evaluated, r.conflict, r.invalid, r.insensitive, r.duplicate
            );
        }
        let evo = dir.join("evolution.csv");
        let rej = dir.join("rejections.csv");
        write_csv(&evo, &evolution)?;
        write_csv(&rej, &rejections)?;
        manifest.output(&evo).output(&rej);
    }
    let md_path = dir.join("report.md");
    write_file(&md_path, &md)?;
    manifest.output(&md_path).write(&dir.join("report.manifest.json"))?;
    emit(&md);
    Ok(())
}
