//! The `emq` command-line tool: benchmark construction, proxy evolution,
//! evaluation, bit assignment and reporting.

pub mod args;
mod commands;
pub mod manifest;
mod proxy;

use std::path::Path;

use emq_core::Exec;
use thiserror::Error;

pub use args::Cli;
pub use proxy::{load_genome, ProxySource, SHIPPED_EMQ_JSON};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("CSV error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Bench(#[from] emq_core::bench::BenchError),
    #[error(transparent)]
    Desk(#[from] emq_core::desk::DeskError),
    #[error(transparent)]
    Search(#[from] emq_core::search::SearchError),
    #[error(transparent)]
    Dsl(#[from] emq_core::dsl::DslError),
    #[error(transparent)]
    Quant(#[from] emq_core::quant::QuantError),
    #[error(transparent)]
    Baseline(#[from] emq_core::baselines::BaselineError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> CliError {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn csv(path: &Path, source: csv::Error) -> CliError {
        CliError::Csv { path: path.display().to_string(), source }
    }
}

/// Sets up the worker pool for `--jobs` and picks the execution mode.
pub fn configure_exec(jobs: Option<u16>) -> Exec {
    match jobs {
        Some(1) => Exec::Sequential,
        Some(n) => {
            // Fails only if a pool already exists, in which case it is reused.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global();
            Exec::Parallel
        }
        None => Exec::default(),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let exec = configure_exec(cli.jobs);
    commands::dispatch(cli.command, exec)
}
