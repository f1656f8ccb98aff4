use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::eval::{config_score, layer_scores, Invalid};
use super::genome::ProxyGenome;
use super::hash::{canonical_hash, GenomeHash};
use super::DslError;
use crate::netzoo::LayerStats;
use crate::tensor::UnaryOp;

pub const MIN_PROBES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Ok,
    Conflict,
    InvalidScore,
    Insensitive,
    Duplicate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub passed: bool,
    pub reason: Reason,
}

impl ScreenReport {
    pub const OK: ScreenReport = ScreenReport { passed: true, reason: Reason::Ok };

    pub fn reject(reason: Reason) -> Self {
        ScreenReport { passed: false, reason }
    }
}

const ACTIVATIONS: [UnaryOp; 5] = [UnaryOp::Relu, UnaryOp::LeakyRelu, UnaryOp::Swish, UnaryOp::Mish, UnaryOp::Tanh];

const CONFLICT_PAIRS: [(UnaryOp, UnaryOp); 10] = [
    (UnaryOp::Log, UnaryOp::Exp),
    (UnaryOp::Normalize, UnaryOp::MinMaxNormalize),
    (UnaryOp::Relu, UnaryOp::Sigmoid),
    (UnaryOp::Log, UnaryOp::Softmax),
    (UnaryOp::Pow, UnaryOp::Sqrt),
    (UnaryOp::Sigmoid, UnaryOp::Softmax),
    (UnaryOp::FrobeniusNorm, UnaryOp::Revert),
    (UnaryOp::Invert, UnaryOp::Invert),
    (UnaryOp::Revert, UnaryOp::Revert),
    (UnaryOp::Abs, UnaryOp::Relu),
];

/// Whether two adjacent unary ops conflict, in either order.
pub fn conflicting(a: UnaryOp, b: UnaryOp) -> bool {
    if ACTIVATIONS.contains(&a) && ACTIVATIONS.contains(&b) {
        return true;
    }
    CONFLICT_PAIRS.iter().any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
}

fn path_conflicts(path: &[UnaryOp]) -> bool {
    let ops: Vec<UnaryOp> = path.iter().copied().filter(|&o| o != UnaryOp::NoOp).collect();
    ops.windows(2).any(|w| conflicting(w[0], w[1]))
}

/// Rejects genomes where two consecutive unary ops on a path (ignoring
/// `no_op`) form a conflict pair.
pub fn check_conflicts(genome: &ProxyGenome) -> ScreenReport {
    let conflict = match genome {
        ProxyGenome::Sequential { ops, aggregate, .. } => {
            let mut path = ops.to_vec();
            path.push(*aggregate);
            path_conflicts(&path)
        }
        ProxyGenome::Branched { branch_a, branch_b, .. } => path_conflicts(branch_a) || path_conflicts(branch_b),
        // Every unary op in a DAG is separated from the next by a binary fold.
        ProxyGenome::Dag { .. } => false,
    };
    if conflict {
        ScreenReport::reject(Reason::Conflict)
    } else {
        ScreenReport::OK
    }
}

/// True when a score carries no ranking information: non-finite or within
/// 1e-12 of -1, 0 or 1.
pub fn naive_invalid_check(score: f64) -> bool {
    !score.is_finite() || [-1.0, 0.0, 1.0].iter().any(|v| (score - v).abs() <= 1e-12)
}

/// Passes when config scores over the probes are not all (numerically) the
/// same.
pub fn sensitivity_check(layer_scores: &[f64], probes: &[Vec<u8>]) -> Result<ScreenReport, DslError> {
    validate_probes(probes)?;
    let scores: Vec<f64> = probes.iter().map(|p| config_score(layer_scores, p)).collect();
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let std = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(if std < 1e-12 * mean.abs().max(1.0) || !std.is_finite() {
        ScreenReport::reject(Reason::Insensitive)
    } else {
        ScreenReport::OK
    })
}

fn validate_probes(probes: &[Vec<u8>]) -> Result<(), DslError> {
    if probes.len() < MIN_PROBES {
        return Err(DslError::Probes(format!("need at least {MIN_PROBES} probe configs, got {}", probes.len())));
    }
    if probes.iter().all(|p| *p == probes[0]) {
        return Err(DslError::Probes("probe configs are all identical".into()));
    }
    Ok(())
}

/// Which screening stages run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenOptions {
    pub conflicts: bool,
    pub invalid: bool,
    pub sensitivity: bool,
    pub duplicates: bool,
}

impl ScreenOptions {
    pub const ALL: ScreenOptions =
        ScreenOptions { conflicts: true, invalid: true, sensitivity: true, duplicates: true };
    pub const NONE: ScreenOptions =
        ScreenOptions { conflicts: false, invalid: false, sensitivity: false, duplicates: false };
}

impl Default for ScreenOptions {
    fn default() -> Self {
        ScreenOptions::ALL
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenCounters {
    pub screened: u64,
    pub passed: u64,
    pub conflict: u64,
    pub invalid: u64,
    pub insensitive: u64,
    pub duplicate: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScreenOutcome {
    /// Cleared for full evaluation. Layer scores are `Err` only when the
    /// invalid-score stage is disabled.
    Passed {
        layer_scores: Result<Vec<f64>, Invalid>,
        hash: GenomeHash,
    },
    Rejected(Reason),
}

/// Stateful screening pipeline: conflicts, evaluation, invalid-score check,
/// sensitivity check, then duplicate check against every genome that has
/// already passed.
#[derive(Clone, Debug)]
pub struct Screener {
    pub options: ScreenOptions,
    probes: Vec<Vec<u8>>,
    seen: HashSet<GenomeHash>,
    pub counters: ScreenCounters,
}

impl Screener {
    pub fn new(options: ScreenOptions, probes: Vec<Vec<u8>>) -> Result<Screener, DslError> {
        validate_probes(&probes)?;
        Ok(Screener { options, probes, seen: HashSet::new(), counters: ScreenCounters::default() })
    }

    pub fn probes(&self) -> &[Vec<u8>] {
        &self.probes
    }

    pub fn has_seen(&self, hash: &GenomeHash) -> bool {
        self.seen.contains(hash)
    }

    /// Screens without recording anything.
    pub fn inspect(&self, genome: &ProxyGenome, stats: &[LayerStats]) -> ScreenOutcome {
        let o = self.options;
        if o.conflicts && !check_conflicts(genome).passed {
            return ScreenOutcome::Rejected(Reason::Conflict);
        }
        let scores = layer_scores(genome, stats);
        if o.invalid {
            match &scores {
                Err(_) => return ScreenOutcome::Rejected(Reason::InvalidScore),
                Ok(s) if s.iter().any(|&v| naive_invalid_check(v)) => {
                    return ScreenOutcome::Rejected(Reason::InvalidScore)
                }
                Ok(_) => {}
            }
        }
        if o.sensitivity {
            let passes = match &scores {
                Ok(s) => sensitivity_check(s, &self.probes).expect("probes validated").passed,
                Err(_) => false,
            };
            if !passes {
                return ScreenOutcome::Rejected(Reason::Insensitive);
            }
        }
        let hash = canonical_hash(genome);
        if o.duplicates && self.seen.contains(&hash) {
            return ScreenOutcome::Rejected(Reason::Duplicate);
        }
        ScreenOutcome::Passed { layer_scores: scores, hash }
    }

    /// Screens and records the outcome; passing hashes join the seen set.
    pub fn screen(&mut self, genome: &ProxyGenome, stats: &[LayerStats]) -> ScreenOutcome {
        let out = self.inspect(genome, stats);
        self.record(&out);
        out
    }

    pub fn record(&mut self, outcome: &ScreenOutcome) {
        self.counters.screened += 1;
        match outcome {
            ScreenOutcome::Passed { hash, .. } => {
                self.counters.passed += 1;
                self.seen.insert(*hash);
            }
            ScreenOutcome::Rejected(r) => match r {
                Reason::Conflict => self.counters.conflict += 1,
                Reason::InvalidScore => self.counters.invalid += 1,
                Reason::Insensitive => self.counters.insensitive += 1,
                Reason::Duplicate => self.counters.duplicate += 1,
                Reason::Ok => unreachable!("rejections carry a failure reason"),
            },
        }
    }
}
