//! Rank metrics, the fitness objective and the evolutionary search over
//! proxy genomes.

mod evolve;
mod fitness;
mod metrics;
mod operators;

use thiserror::Error;

use crate::bench::BenchError;
use crate::dsl::{DslError, Structure};

pub use evolve::{
    evolve, random_search, BenchSplit, HistoryRow, Individual, OffspringRecord, SearchConfig, SearchResult,
    HISTORY_HEADER,
};
pub use fitness::{FitnessContext, RankReport, DEFAULT_TOPK_FRACTIONS};
pub use metrics::{average_ranks, kendall, pearson, spearman, spearman_at_topk, Correlation};
pub use operators::{crossover, mutate, mutate_traced, tournament_select};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("metric error: {0}")]
    Metric(String),
    #[error("invalid search config: {0}")]
    Config(String),
    #[error("cannot cross a {0} genome with a {1} genome")]
    StructureMismatch(Structure, Structure),
    #[error("no valid initial population after {attempts} attempts")]
    InitFailed { attempts: u64 },
    #[error("no valid offspring after {attempts} attempts in generation {generation}")]
    Stalled { generation: usize, attempts: u64 },
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Bench(#[from] BenchError),
}
