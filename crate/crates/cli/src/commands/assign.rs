use std::path::Path;

use emq_core::bench::Benchmark;
use emq_core::desk::Desk;
use emq_core::quant::{
    apply_with_activations, assign_bits, compute_bops, size_mb, AssignOptions, Assignment, BitConfig, LinearScorer,
};
use emq_core::Exec;
use serde::Serialize;

use super::{eval::write_csv, print_json};
use crate::args::AssignArgs;
use crate::manifest::{sibling_manifest, write_file, ManifestBuilder};
use crate::proxy::ProxySource;
use crate::CliError;

#[derive(Serialize)]
struct AssignConfig<'a> {
    net: String,
    net_seed: u64,
    scorer: String,
    budget_mb: f64,
    samples: usize,
    palette: &'a [u8],
    pin_first_last: bool,
    seed: u64,
    sweep: Option<u32>,
}

#[derive(Serialize)]
struct AssignReport {
    net: String,
    net_seed: u64,
    scorer: String,
    budget_mb: f64,
    weight_bits: Vec<u8>,
    activation_bits: u8,
    model_size_mb: f64,
    score: f64,
    bops_g: f64,
    accuracy: f64,
    float_accuracy: f64,
    candidates: usize,
}

#[derive(Serialize)]
struct ParetoRow {
    budget_mb: f64,
    model_size_mb: f64,
    bops_g: f64,
    accuracy: f64,
    score: f64,
    weight_bits: String,
}

fn evaluate(desk: &Desk, bits: &[u8]) -> Result<(f64, f64), CliError> {
    let cfg = BitConfig::new(bits.to_vec(), desk.config.activation_bits);
    let acc = apply_with_activations(&desk.net, &cfg, desk.act_schemes.clone())?.accuracy(&desk.eval)?;
    Ok((acc, compute_bops(&desk.net, &cfg)?))
}

/// Smallest and largest model sizes reachable with the palette.
fn size_range(numels: &[usize], palette: &[u8], pin: bool) -> (f64, f64) {
    let lo = *palette.iter().min().expect("non-empty palette");
    let hi = *palette.iter().max().expect("non-empty palette");
    let fill = |b: u8| {
        let mut bits = vec![b; numels.len()];
        if pin {
            bits[0] = 8;
            *bits.last_mut().expect("layers") = 8;
        }
        size_mb(numels, &bits)
    };
    (fill(lo), fill(hi))
}

/// Keeps rows whose size strictly exceeds every earlier kept row.
fn strictly_increasing(points: Vec<(f64, Assignment)>) -> Vec<(f64, Assignment)> {
    let mut out: Vec<(f64, Assignment)> = Vec::new();
    for (budget, a) in points {
        if out.last().is_none_or(|(_, prev)| a.model_size_mb > prev.model_size_mb) {
            out.push((budget, a));
        }
    }
    out
}

pub fn run(a: AssignArgs, exec: Exec) -> Result<(), CliError> {
    let seed = a.seed.seed;
    let (desk, net_seed) = match (&a.bench, a.net) {
        (Some(path), _) => {
            let bench = Benchmark::load(path)?;
            (Desk::default_for(bench.net.spec, bench.net.seed)?, bench.net.seed)
        }
        (None, Some(arch)) => {
            let net_seed = a.net_seed.unwrap_or(seed);
            (Desk::default_for(arch, net_seed)?, net_seed)
        }
        (None, None) => unreachable!("clap requires a network"),
    };
    let source = match (&a.proxy, a.baseline) {
        (Some(path), _) => ProxySource::from_file(path)?,
        (None, Some(id)) => ProxySource::Baseline(id),
        (None, None) => unreachable!("clap requires a scorer"),
    };
    let config = AssignConfig {
        net: desk.config.arch.to_string(),
        net_seed,
        scorer: source.name(),
        budget_mb: a.budget_mb,
        samples: a.samples,
        palette: &a.palette.0,
        pin_first_last: a.pin_first_last,
        seed,
        sweep: a.sweep,
    };
    let mut manifest = ManifestBuilder::new("assign", &config);
    manifest.seed("seed", seed).seed("net_seed", net_seed);
    for p in a.bench.iter().chain(&a.proxy) {
        manifest.input(p);
    }

    let scorer = LinearScorer { layer_scores: source.layer_scores(&desk, seed)? };
    let numels = desk.net.layer_numels();
    let opts = |budget_mb: f64| AssignOptions {
        palette: a.palette.0.clone(),
        budget_mb,
        n_samples: a.samples,
        seed,
        pin_first_last: a.pin_first_last,
    };
    let best = assign_bits(&scorer, &numels, &opts(a.budget_mb))?;
    let (accuracy, bops_g) = evaluate(&desk, &best.weight_bits)?;
    let report = AssignReport {
        net: config.net.clone(),
        net_seed,
        scorer: config.scorer.clone(),
        budget_mb: a.budget_mb,
        weight_bits: best.weight_bits.clone(),
        activation_bits: desk.config.activation_bits,
        model_size_mb: best.model_size_mb,
        score: best.score,
        bops_g,
        accuracy,
        float_accuracy: desk.float_accuracy,
        candidates: best.candidates,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializes");
    text.push('\n');
    write_file(&a.out, &text)?;
    manifest.output(&a.out);

    if let (Some(path), Some(n)) = (&a.pareto, a.sweep) {
        write_pareto(path, n, &desk, &scorer, &numels, opts, exec)?;
        manifest.output(path);
    }
    manifest.write(&sibling_manifest(&a.out))?;
    print_json(&report);
    Ok(())
}

fn write_pareto(
    path: &Path,
    n: u32,
    desk: &Desk,
    scorer: &LinearScorer,
    numels: &[usize],
    opts: impl Fn(f64) -> AssignOptions,
    exec: Exec,
) -> Result<(), CliError> {
    let base = opts(0.0);
    let (lo, hi) = size_range(numels, &base.palette, base.pin_first_last);
    let budgets: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let points = budgets
        .iter()
        .map(|&b| assign_bits(scorer, numels, &opts(b)).map(|a| (b, a)))
        .collect::<Result<Vec<_>, _>>()?;
    let points = strictly_increasing(points);
    let evaluated = exec.map(&points, |(_, a)| evaluate(desk, &a.weight_bits));
    let mut rows = Vec::with_capacity(points.len());
    for ((budget_mb, a), r) in points.into_iter().zip(evaluated) {
        let (accuracy, bops_g) = r?;
        rows.push(ParetoRow {
            budget_mb,
            model_size_mb: a.model_size_mb,
            bops_g,
            accuracy,
            score: a.score,
            weight_bits: a.weight_bits.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "),
        });
    }
    write_csv(path, &rows)
}
