//! The proxy search space: genomes over per-layer statistics, their
//! evaluation, structural hashing and pre-evaluation screening.

mod eval;
pub mod fixtures;
mod genome;
mod hash;
mod screen;

use thiserror::Error;

pub use eval::{config_score, evaluate_layer, layer_scores, score_config, Invalid, Score};
pub use genome::{
    sample_genome, DagNode, ProxyGenome, Sampler, Slot, Structure, AGGREGATORS, BRANCH_OPS, DAG_NODES,
    OSP_BINARY_WEIGHTS, OSP_NO_OP_WEIGHT, SEQUENTIAL_OPS,
};
pub use hash::{canonical_hash, GenomeHash, WL_ITERATIONS};
pub use screen::{
    check_conflicts, conflicting, naive_invalid_check, sensitivity_check, Reason, ScreenCounters, ScreenOptions,
    ScreenOutcome, ScreenReport, Screener, MIN_PROBES,
};

#[derive(Debug, Error, PartialEq)]
pub enum DslError {
    #[error("genome parse error: {0}")]
    Parse(String),
    #[error("invalid probe configs: {0}")]
    Probes(String),
}
