mod assign;
mod bench;
mod eval;
mod evolve;
mod report;

use std::path::Path;

use emq_core::bench::Benchmark;
use emq_core::desk::Desk;
use emq_core::Exec;

use crate::args::{BenchCommand, Command};
use crate::CliError;

pub fn dispatch(command: Command, exec: Exec) -> Result<(), CliError> {
    match command {
        Command::Bench(BenchCommand::Build(a)) => bench::build(a, exec),
        Command::Bench(BenchCommand::Query(a)) => bench::query(a),
        Command::Evolve(a) => evolve::run(a, exec),
        Command::Eval(a) => eval::run(a),
        Command::Assign(a) => assign::run(a, exec),
        Command::Report(a) => report::run(a),
    }
}

/// The benchmark at `path` and the desk it was built from.
fn load_bench_and_desk(path: &Path) -> Result<(Benchmark, Desk), CliError> {
    let bench = Benchmark::load(path)?;
    let desk = Desk::default_for(bench.net.spec, bench.net.seed)?;
    if desk.net.num_layers() != bench.entries.first().map_or(0, |e| e.bit_cfg.len()) {
        return Err(CliError::Input(format!("{}: configurations do not match the network", path.display())));
    }
    Ok((bench, desk))
}

/// Writes to stdout, ignoring a closed pipe (e.g. `emq ... | head`).
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(value: &impl serde::Serialize) {
    let mut text = serde_json::to_string_pretty(value).expect("serializes");
    text.push('\n');
    emit(&text);
}
