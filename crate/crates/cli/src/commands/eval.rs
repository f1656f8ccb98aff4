use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use emq_core::baselines::BaselineId;
use emq_core::search::{BenchSplit, FitnessContext, DEFAULT_TOPK_FRACTIONS};
use serde::{Deserialize, Serialize};

use super::{emit, load_bench_and_desk};
use crate::args::{BaselineChoice, EvalArgs};
use crate::manifest::{sibling_manifest, ManifestBuilder};
use crate::proxy::ProxySource;
use crate::CliError;

pub const ORACLE_NAME: &str = "oracle";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub proxy: String,
    pub run: usize,
    pub seed: u64,
    pub rho_20: f64,
    pub rho_50: f64,
    pub rho_100: f64,
    pub kendall: f64,
    pub pearson: f64,
}

impl EvalRow {
    pub const METRICS: [&'static str; 5] = ["rho_20", "rho_50", "rho_100", "kendall", "pearson"];

    pub fn metrics(&self) -> [f64; 5] {
        [self.rho_20, self.rho_50, self.rho_100, self.kendall, self.pearson]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub proxy: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

#[derive(Serialize)]
struct EvalConfig {
    proxies: Vec<String>,
    baselines: Vec<BaselineId>,
    oracle: bool,
    runs: usize,
    n_configs: usize,
    fractions: [f64; 3],
    seed: u64,
}

/// `<out>` with `.csv` replaced by `.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn expand_baselines(choices: &[BaselineChoice]) -> Vec<BaselineId> {
    let mut out: Vec<BaselineId> = Vec::new();
    for c in choices {
        let ids: &[BaselineId] = match c {
            BaselineChoice::All => &BaselineId::ALL,
            BaselineChoice::One(id) => std::slice::from_ref(id),
        };
        for id in ids {
            if !out.contains(id) {
                out.push(*id);
            }
        }
    }
    out
}

/// Mean and sample standard deviation; std is 0 for a single value.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(rows: &[EvalRow]) -> Vec<SummaryRow> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.proxy.as_str()) {
            names.push(&r.proxy);
        }
    }
    let mut out = Vec::new();
    for name in names {
        let mine: Vec<&EvalRow> = rows.iter().filter(|r| r.proxy == name).collect();
        for (m, metric) in EvalRow::METRICS.iter().enumerate() {
            let xs: Vec<f64> = mine.iter().map(|r| r.metrics()[m]).collect();
            let (mean, std) = mean_std(&xs);
            out.push(SummaryRow { proxy: name.to_string(), metric: metric.to_string(), mean, std, runs: xs.len() });
        }
    }
    out
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(|e| CliError::csv(path, e))
}

pub fn run(a: EvalArgs) -> Result<(), CliError> {
    let baselines = expand_baselines(&a.sources.baselines);
    if a.sources.proxies.is_empty() && baselines.is_empty() && !a.oracle {
        return Err(CliError::Input("nothing to evaluate: give --proxy, --baseline or --oracle".into()));
    }
    if a.runs == 0 {
        return Err(CliError::Input("--runs must be at least 1".into()));
    }
    let seed = a.seed.seed;
    let config = EvalConfig {
        proxies: a.sources.proxies.iter().map(|p| p.display().to_string()).collect(),
        baselines: baselines.clone(),
        oracle: a.oracle,
        runs: a.runs,
        n_configs: a.n_configs,
        fractions: DEFAULT_TOPK_FRACTIONS,
        seed,
    };
    let mut manifest = ManifestBuilder::new("eval", &config);
    manifest.seed("seed", seed).input(&a.bench);

    let mut sources = Vec::new();
    for p in &a.sources.proxies {
        manifest.input(p);
        sources.push(ProxySource::from_file(p)?);
    }
    sources.extend(baselines.into_iter().map(ProxySource::Baseline));
    let (bench, desk) = load_bench_and_desk(&a.bench)?;

    let contexts = (0..a.runs)
        .map(|r| {
            let s = seed.wrapping_add(r as u64);
            FitnessContext::for_split(&bench, BenchSplit::Test, a.n_configs, &DEFAULT_TOPK_FRACTIONS, s).map(|c| (s, c))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut push = |proxy: &str, run: usize, s: u64, ctx: &FitnessContext, est: &[f64]| -> Result<(), CliError> {
        let rep = ctx.report(est)?;
        rows.push(EvalRow {
            proxy: proxy.to_string(),
            run,
            seed: s,
            rho_20: rep.rho_at[0],
            rho_50: rep.rho_at[1],
            rho_100: rep.rho_at[2],
            kendall: rep.kendall,
            pearson: rep.pearson,
        });
        Ok(())
    };
    for src in &sources {
        let name = src.name();
        let started = Instant::now();
        let scores = src.layer_scores(&desk, seed)?;
        let estimates: Vec<Vec<f64>> = contexts.iter().map(|(_, c)| c.estimates(&scores)).collect();
        let per_config = started.elapsed().as_secs_f64() / (a.runs * a.n_configs) as f64;
        log::info!("{name}: {per_config:.3e} s per configuration");
        manifest.timing(&format!("{name}.secs_per_config"), per_config);
        for (run, ((s, ctx), est)) in contexts.iter().zip(&estimates).enumerate() {
            push(&name, run, *s, ctx, est)?;
        }
    }
    if a.oracle {
        for (run, (s, ctx)) in contexts.iter().enumerate() {
            push(ORACLE_NAME, run, *s, ctx, &ctx.accuracies)?;
        }
    }

    let summary = summarize(&rows);
    let spath = summary_path(&a.out);
    write_csv(&a.out, &rows)?;
    write_csv(&spath, &summary)?;
    manifest.output(&a.out).output(&spath).write(&sibling_manifest(&a.out))?;

    let mut table = format!(
        "{:<10} {:>16} {:>16} {:>16} {:>16} {:>16}\n",
        "proxy", "rho_20", "rho_50", "rho_100", "kendall", "pearson"
    );
    for chunk in summary.chunks(EvalRow::METRICS.len()) {
        let cells: Vec<String> = chunk.iter().map(|s| format!("{:.4} ± {:.4}", s.mean, s.std)).collect();
        let _ = writeln!(
            table,
            "{:<10} {:>16} {:>16} {:>16} {:>16} {:>16}",
            chunk[0].proxy, cells[0], cells[1], cells[2], cells[3], cells[4]
        );
    }
    emit(&table);
    Ok(())
}
