use emq_core::bench::{build_benchmark, BenchError, Benchmark};
use emq_core::desk::Desk;
use emq_core::Exec;
use serde::Serialize;

use super::print_json;
use crate::args::{BenchBuildArgs, BenchQueryArgs};
use crate::manifest::{sibling_manifest, write_file, ManifestBuilder};
use crate::CliError;

#[derive(Serialize)]
struct BuildConfig<'a> {
    net: String,
    net_seed: u64,
    configs: usize,
    palette: &'a [u8],
    seed: u64,
}

#[derive(Serialize)]
struct BuildSummary {
    entries: usize,
    float_accuracy: f64,
    min_accuracy: f64,
    max_accuracy: f64,
}

pub fn build(a: BenchBuildArgs, exec: Exec) -> Result<(), CliError> {
    let seed = a.seed.seed;
    let net_seed = a.net_seed.unwrap_or(seed);
    let config = BuildConfig { net: a.net.to_string(), net_seed, configs: a.configs, palette: &a.palette.0, seed };
    let mut manifest = ManifestBuilder::new("bench build", &config);
    manifest.seed("seed", seed).seed("net_seed", net_seed);

    // Reject impossible requests before paying for training.
    let space = (a.palette.0.len() as f64).powi(a.net.num_layers() as i32);
    if a.configs as f64 > space {
        return Err(BenchError::TooManyConfigs { requested: a.configs, space: space as usize }.into());
    }
    let desk = Desk::default_for(a.net, net_seed)?;
    let bench = build_benchmark(&desk, a.configs, &a.palette.0, seed, exec)?;
    write_file(&a.out, &bench.to_json())?;
    manifest.output(&a.out).write(&sibling_manifest(&a.out))?;

    let accs: Vec<f64> = bench.entries.iter().map(|e| e.accuracy).collect();
    print_json(&BuildSummary {
        entries: bench.len(),
        float_accuracy: desk.float_accuracy,
        min_accuracy: accs.iter().copied().fold(f64::INFINITY, f64::min),
        max_accuracy: accs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });
    Ok(())
}

pub fn query(a: BenchQueryArgs) -> Result<(), CliError> {
    let bench = Benchmark::load(&a.bench)?;
    let entry = match (a.idx, &a.cfg) {
        (Some(i), _) => bench.entry(i)?,
        (None, Some(cfg)) => bench.entry(bench.get_index_by_config(&cfg.0)? as i64)?,
        (None, None) => unreachable!("clap requires one key"),
    };
    print_json(entry);
    Ok(())
}
