use emq_core::dsl::{canonical_hash, ScreenCounters, ScreenOptions};
use emq_core::search::{evolve, BenchSplit, FitnessContext, HistoryRow, SearchConfig};
use emq_core::Exec;
use serde::Serialize;

use super::{load_bench_and_desk, print_json};
use crate::args::{EvolveArgs, ScreenArg};
use crate::manifest::{write_file, ManifestBuilder};
use crate::CliError;

fn screen_options(s: ScreenArg) -> ScreenOptions {
    let all = ScreenOptions::ALL;
    match s {
        ScreenArg::All => all,
        ScreenArg::None => ScreenOptions::NONE,
        ScreenArg::NoConflicts => ScreenOptions { conflicts: false, ..all },
        ScreenArg::NoInvalid => ScreenOptions { invalid: false, ..all },
        ScreenArg::NoSensitivity => ScreenOptions { sensitivity: false, ..all },
        ScreenArg::NoDuplicates => ScreenOptions { duplicates: false, ..all },
    }
}

#[derive(Serialize)]
struct EvolveSummary {
    best: String,
    hash: String,
    validation_fitness: f64,
    test_fitness: f64,
    generations: usize,
    evaluated: u64,
    counters: ScreenCounters,
}

pub fn run(a: EvolveArgs, exec: Exec) -> Result<(), CliError> {
    let cfg = SearchConfig {
        population_size: a.population,
        iterations: a.iterations,
        n_eval_cfgs: a.n_eval_cfgs,
        structure: a.structure,
        osp: !a.no_osp,
        dps: !a.no_dps,
        screen: screen_options(a.screen),
        seed: a.seed.seed,
        max_evaluations: a.max_evaluations,
        ..SearchConfig::default()
    };
    let mut manifest = ManifestBuilder::new("evolve", &cfg);
    manifest.seed("seed", cfg.seed).input(&a.bench);
    let (bench, desk) = load_bench_and_desk(&a.bench)?;
    manifest.seed("net_seed", bench.net.seed).seed("split_seed", bench.split_seed);

    let result = evolve(&cfg, &bench, &desk.stats, exec)?;
    let best = &result.best;
    let test = FitnessContext::for_split(&bench, BenchSplit::Test, cfg.n_eval_cfgs, &cfg.fractions, cfg.seed)?;
    let scores = emq_core::dsl::layer_scores(&best.genome, &desk.stats)
        .map_err(|why| CliError::Input(format!("best genome no longer scores: {why:?}")))?;
    let summary = EvolveSummary {
        best: best.genome.describe(),
        hash: canonical_hash(&best.genome).to_string(),
        validation_fitness: best.fitness,
        test_fitness: test.fitness(&scores),
        generations: result.history.len() - 1,
        evaluated: result.evaluated,
        counters: result.counters,
    };

    let dir = &a.out_dir;
    let best_path = dir.join("best.json");
    let history_path = dir.join("history.csv");
    let summary_path = dir.join("summary.json");
    write_file(&best_path, &best.genome.to_json())?;
    write_file(&history_path, &HistoryRow::write_csv(&result.history))?;
    let mut summary_text = serde_json::to_string_pretty(&summary).expect("serializes");
    summary_text.push('\n');
    write_file(&summary_path, &summary_text)?;
    manifest.output(&best_path).output(&history_path).output(&summary_path).write(&dir.join("manifest.json"))?;
    print_json(&summary);
    Ok(())
}
