use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use emq_core::baselines::BaselineId;
use emq_core::dsl::Structure;
use emq_core::netzoo::Arch;

#[derive(Debug, Parser)]
#[command(name = "emq", version, about = "Evolve and evaluate training-free mixed-precision proxies")]
pub struct Cli {
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or query a quantization benchmark.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Evolve a proxy against a benchmark.
    Evolve(EvolveArgs),
    /// Rank-correlation report for proxies on the test split.
    Eval(EvalArgs),
    /// Bit-width assignment under a model-size budget.
    Assign(AssignArgs),
    /// Merge eval and evolve outputs into one report.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    Build(BenchBuildArgs),
    Query(BenchQueryArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// Global seed; falls back to EMQ_SEED, then 0.
    #[arg(long, env = "EMQ_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchBuildArgs {
    #[arg(long, value_parser = parse_arch)]
    pub net: Arch,
    /// Number of bit configurations to sample.
    #[arg(long)]
    pub configs: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Seed of the reference network; defaults to --seed.
    #[arg(long)]
    pub net_seed: Option<u64>,
    #[arg(long, value_parser = parse_bits, default_value = "2,3,4")]
    pub palette: Bits,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("key").required(true).args(["idx", "cfg"])))]
pub struct BenchQueryArgs {
    #[arg(long)]
    pub bench: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub idx: Option<i64>,
    /// Comma-separated weight bit-widths, e.g. 2,3,4,4.
    #[arg(long, value_parser = parse_bits)]
    pub cfg: Option<Bits>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScreenArg {
    All,
    None,
    NoConflicts,
    NoInvalid,
    NoSensitivity,
    NoDuplicates,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub bench: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 200)]
    pub iterations: usize,
    #[arg(long, default_value_t = 20)]
    pub population: usize,
    #[arg(long, value_parser = parse_structure, default_value = "branched")]
    pub structure: Structure,
    /// Stop after this many full evaluations.
    #[arg(long)]
    pub max_evaluations: Option<u64>,
    #[arg(long, default_value_t = 50)]
    pub n_eval_cfgs: usize,
    /// Sample operations uniformly instead of with prioritization.
    #[arg(long)]
    pub no_osp: bool,
    /// Disable diversity-prompting selection.
    #[arg(long)]
    pub no_dps: bool,
    #[arg(long, value_enum, default_value = "all")]
    pub screen: ScreenArg,
}

#[derive(Debug, Args)]
pub struct ProxySources {
    /// Genome JSON file; repeatable.
    #[arg(long = "proxy")]
    pub proxies: Vec<PathBuf>,
    /// Handcrafted baseline id; repeatable, or `all`.
    #[arg(long = "baseline", value_parser = parse_baseline)]
    pub baselines: Vec<BaselineChoice>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaselineChoice {
    One(BaselineId),
    All,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub bench: PathBuf,
    #[command(flatten)]
    pub sources: ProxySources,
    /// Also score the ground truth itself, a sanity ceiling.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, default_value_t = 50)]
    pub n_configs: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Per-run CSV; a `.summary.csv` sibling holds mean and std.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("network").required(true).args(["bench", "net"])))]
#[command(group(ArgGroup::new("scorer").required(true).args(["proxy", "baseline"])))]
pub struct AssignArgs {
    /// Take the network from a benchmark file.
    #[arg(long)]
    pub bench: Option<PathBuf>,
    #[arg(long, value_parser = parse_arch)]
    pub net: Option<Arch>,
    /// Network seed with --net; defaults to --seed.
    #[arg(long)]
    pub net_seed: Option<u64>,
    #[arg(long)]
    pub proxy: Option<PathBuf>,
    #[arg(long, value_parser = parse_single_baseline)]
    pub baseline: Option<BaselineId>,
    #[arg(long)]
    pub budget_mb: f64,
    #[arg(long, default_value_t = 5000)]
    pub samples: usize,
    #[arg(long, value_parser = parse_bits, default_value = "2,3,4")]
    pub palette: Bits,
    /// Keep the first and last layers at 8 bits.
    #[arg(long)]
    pub pin_first_last: bool,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Budget sweep written as CSV.
    #[arg(long, requires = "sweep")]
    pub pareto: Option<PathBuf>,
    /// Number of budgets in the sweep.
    #[arg(long, requires = "pareto", value_parser = clap::value_parser!(u32).range(2..))]
    pub sweep: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Eval CSV files written by `emq eval`.
    #[arg(long = "eval")]
    pub evals: Vec<PathBuf>,
    /// Evolution output directories or history CSV files.
    #[arg(long = "history")]
    pub histories: Vec<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// A parsed bit-width list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bits(pub Vec<u8>);

fn parse_bits(s: &str) -> Result<Bits, String> {
    let bits = s
        .split(',')
        .map(|p| p.trim().parse::<u8>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<u8>, String>>()?;
    if bits.is_empty() {
        return Err("empty bit list".into());
    }
    Ok(Bits(bits))
}

fn parse_arch(s: &str) -> Result<Arch, String> {
    s.parse::<Arch>().map_err(|e| e.to_string())
}

fn parse_structure(s: &str) -> Result<Structure, String> {
    s.parse::<Structure>().map_err(|e| e.to_string())
}

fn parse_single_baseline(s: &str) -> Result<BaselineId, String> {
    s.parse::<BaselineId>().map_err(|e| e.to_string())
}

fn parse_baseline(s: &str) -> Result<BaselineChoice, String> {
    if s == "all" {
        return Ok(BaselineChoice::All);
    }
    parse_single_baseline(s).map(BaselineChoice::One)
}
