//! The quantization benchmark: sampled bit configurations with their
//! post-training quantized accuracy, persisted as versioned JSON.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::desk::Desk;
use crate::exec::Exec;
use crate::netzoo::Arch;
use crate::quant::{apply_with_activations, check_bits, size_mb, BitConfig, QuantError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{requested} configurations requested but only {space} exist")]
    TooManyConfigs { requested: usize, space: usize },
    #[error("invalid palette: {0}")]
    InvalidPalette(String),
    #[error("no entry with index {0}")]
    UnknownIndex(i64),
    #[error("configuration {0:?} is not in the benchmark")]
    UnknownConfig(Vec<u8>),
    #[error("need at least 10 entries to split, have {0}")]
    TooFewEntries(usize),
    #[error("benchmark is empty")]
    Empty,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported benchmark version {found} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { found: i64 },
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Quant(#[from] QuantError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetRef {
    pub spec: Arch,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub index: usize,
    pub bit_cfg: Vec<u8>,
    pub accuracy: f64,
    pub model_size_mb: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Benchmark {
    pub version: u32,
    pub net: NetRef,
    pub activation_bits: u8,
    pub palette: Vec<u8>,
    pub entries: Vec<BenchmarkEntry>,
    pub split_seed: u64,
}

/// All `palette^layers` configurations in lexicographic order.
pub fn enumerate_configs(palette: &[u8], layers: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..layers {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                palette.iter().map(move |&b| {
                    let mut next = prefix.clone();
                    next.push(b);
                    next
                })
            })
            .collect();
    }
    out
}

fn checked_palette(palette: &[u8]) -> Result<Vec<u8>, BenchError> {
    let mut p = palette.to_vec();
    p.sort_unstable();
    p.dedup();
    if p.is_empty() || p.len() != palette.len() {
        return Err(BenchError::InvalidPalette(format!("{palette:?} must be non-empty without repeats")));
    }
    p.iter().try_for_each(|&b| check_bits(b))?;
    Ok(p)
}

/// Samples `n_configs` distinct configurations uniformly without
/// replacement (all of them, in order, when the space is that small) and
/// evaluates each on the desk's evaluation split.
pub fn build_benchmark(
    desk: &Desk,
    n_configs: usize,
    palette: &[u8],
    seed: u64,
    exec: Exec,
) -> Result<Benchmark, BenchError> {
    let palette = checked_palette(palette)?;
    let layers = desk.net.num_layers();
    let space = (palette.len() as f64).powi(layers as i32);
    if n_configs as f64 > space {
        return Err(BenchError::TooManyConfigs { requested: n_configs, space: space as usize });
    }
    if n_configs == 0 {
        return Err(BenchError::Empty);
    }
    let mut configs = enumerate_configs(&palette, layers);
    if n_configs < configs.len() {
        configs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        configs.truncate(n_configs);
    }
    let numels = desk.net.layer_numels();
    let act_bits = desk.config.activation_bits;
    let results = exec.map(&configs, |bits| -> Result<f64, QuantError> {
        let cfg = BitConfig::new(bits.clone(), act_bits);
        apply_with_activations(&desk.net, &cfg, desk.act_schemes.clone())?.accuracy(&desk.eval)
    });
    let mut entries = Vec::with_capacity(configs.len());
    for (index, (bits, acc)) in configs.into_iter().zip(results).enumerate() {
        let model_size_mb = size_mb(&numels, &bits);
        entries.push(BenchmarkEntry { index, bit_cfg: bits, accuracy: acc?, model_size_mb });
    }
    Ok(Benchmark {
        version: FORMAT_VERSION,
        net: NetRef { spec: desk.config.arch, seed: desk.config.seed },
        activation_bits: act_bits,
        palette,
        entries,
        split_seed: seed,
    })
}

impl Benchmark {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("benchmark serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Benchmark, BenchError> {
        let parse_err =
            |e: serde_json::Error| BenchError::Parse { line: e.line(), column: e.column(), message: e.to_string() };
        let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
        match value.get("version").and_then(serde_json::Value::as_i64) {
            Some(v) if v == FORMAT_VERSION as i64 => {}
            Some(v) => return Err(BenchError::UnsupportedVersion { found: v }),
            None => {
                return Err(BenchError::Parse { line: 1, column: 1, message: "missing integer `version` field".into() })
            }
        }
        serde_json::from_str(text).map_err(parse_err)
    }

    pub fn persist(&self, path: &Path) -> Result<(), BenchError> {
        std::fs::write(path, self.to_json())
            .map_err(|source| BenchError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Benchmark, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| BenchError::Io { path: path.display().to_string(), source })?;
        Benchmark::from_json(&text)
    }

    pub fn entry(&self, idx: i64) -> Result<&BenchmarkEntry, BenchError> {
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.entries.get(i))
            .filter(|e| e.index as i64 == idx)
            .or_else(|| self.entries.iter().find(|e| e.index as i64 == idx))
            .ok_or(BenchError::UnknownIndex(idx))
    }

    pub fn query_by_index(&self, idx: i64) -> Result<(Vec<u8>, f64), BenchError> {
        let e = self.entry(idx)?;
        Ok((e.bit_cfg.clone(), e.accuracy))
    }

    pub fn get_index_by_config(&self, cfg: &[u8]) -> Result<usize, BenchError> {
        self.entries
            .iter()
            .find(|e| e.bit_cfg == cfg)
            .map(|e| e.index)
            .ok_or_else(|| BenchError::UnknownConfig(cfg.to_vec()))
    }

    pub fn query_by_config(&self, cfg: &[u8]) -> Result<f64, BenchError> {
        let idx = self.get_index_by_config(cfg)?;
        Ok(self.entry(idx as i64)?.accuracy)
    }

    pub fn random_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize, BenchError> {
        self.entries.choose(rng).map(|e| e.index).ok_or(BenchError::Empty)
    }

    pub fn random_config(&self, seed: u64) -> Result<Vec<u8>, BenchError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = self.random_index(&mut rng)?;
        Ok(self.entry(idx as i64)?.bit_cfg.clone())
    }

    /// Positions into `entries` for the validation and test splits.
    pub fn split(&self) -> Result<(Vec<usize>, Vec<usize>), BenchError> {
        split_validation_test(self.len(), self.split_seed)
    }

    pub fn accuracies(&self, positions: &[usize]) -> Vec<f64> {
        positions.iter().map(|&p| self.entries[p].accuracy).collect()
    }
}

/// Seeded 70/30 partition of `0..n`; each part is returned sorted.
pub fn split_validation_test(n: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>), BenchError> {
    if n < 10 {
        return Err(BenchError::TooFewEntries(n));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x0073_706c_6974));
    let n_val = n * 7 / 10;
    let mut val = idx[..n_val].to_vec();
    let mut test = idx[n_val..].to_vec();
    val.sort_unstable();
    test.sort_unstable();
    Ok((val, test))
}
