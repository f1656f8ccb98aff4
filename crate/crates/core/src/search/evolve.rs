use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fitness::{FitnessContext, DEFAULT_TOPK_FRACTIONS};
use super::operators::{crossover, mutate, tournament_select};
use super::SearchError;
use crate::bench::Benchmark;
use crate::dsl::{
    GenomeHash, ProxyGenome, Reason, Sampler, ScreenCounters, ScreenOptions, ScreenOutcome, Screener, Structure,
    MIN_PROBES,
};
use crate::exec::Exec;
use crate::netzoo::LayerStats;

// Named RNG streams; each search component draws from its own.
const STREAM_INIT: u64 = 1;
const STREAM_SELECTION: u64 = 2;
const STREAM_CROSSOVER: u64 = 3;
const STREAM_MUTATION: u64 = 4;
const STREAM_DPS: u64 = 5;
const STREAM_FITNESS: u64 = 6;
const STREAM_RANDOM: u64 = 7;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub population_size: usize,
    pub iterations: usize,
    pub selection_ratio: f64,
    pub top_k: usize,
    pub p_c: f64,
    pub p_m: f64,
    pub n_eval_cfgs: usize,
    pub fractions: Vec<f64>,
    pub structure: Structure,
    pub osp: bool,
    pub dps: bool,
    pub screen: ScreenOptions,
    pub seed: u64,
    /// Stop once this many genomes have been fully evaluated.
    pub max_evaluations: Option<u64>,
    /// Stop once this many candidates have been screened.
    pub max_candidates: Option<u64>,
    pub max_init_attempts: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population_size: 20,
            iterations: 200,
            selection_ratio: 0.25,
            top_k: 2,
            p_c: 0.5,
            p_m: 0.5,
            n_eval_cfgs: 50,
            fractions: DEFAULT_TOPK_FRACTIONS.to_vec(),
            structure: Structure::Branched,
            osp: true,
            dps: true,
            screen: ScreenOptions::ALL,
            seed: 0,
            max_evaluations: None,
            max_candidates: None,
            max_init_attempts: 100_000,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<(), SearchError> {
        if self.population_size < 2 {
            return Err(SearchError::Config(format!("population size {} is below 2", self.population_size)));
        }
        if self.n_eval_cfgs < MIN_PROBES {
            return Err(SearchError::Config(format!(
                "need at least {MIN_PROBES} fitness configs, got {}",
                self.n_eval_cfgs
            )));
        }
        if self.fractions.is_empty() || self.fractions.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(SearchError::Config(format!("top-k fractions {:?} must lie in (0, 1]", self.fractions)));
        }
        for (name, p) in [("p_c", self.p_c), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SearchError::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn sampler(&self) -> Sampler {
        Sampler { osp: self.osp }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchSplit {
    Validation,
    Test,
}

impl FitnessContext {
    /// `n` configurations from one benchmark split, drawn with `seed`.
    pub fn for_split(
        bench: &Benchmark,
        split: BenchSplit,
        n: usize,
        fractions: &[f64],
        seed: u64,
    ) -> Result<FitnessContext, SearchError> {
        let (val, test) = bench.split()?;
        let positions = match split {
            BenchSplit::Validation => val,
            BenchSplit::Test => test,
        };
        FitnessContext::sample(bench, &positions, n, fractions, &mut stream(seed, STREAM_FITNESS))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: ProxyGenome,
    pub fitness: f64,
    pub hash: GenomeHash,
    /// Admission order; lower is older.
    pub born: u64,
}

pub const HISTORY_HEADER: &str = "generation,best_fitness,mean_fitness,evaluated_count,rejected_conflict,\
rejected_invalid,rejected_insensitive,rejected_duplicate,sampled_count,population_size";

/// One line of the search log, taken after each generation (0 is the
/// initial population). Counters are cumulative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub evaluated_count: u64,
    pub rejected_conflict: u64,
    pub rejected_invalid: u64,
    pub rejected_insensitive: u64,
    pub rejected_duplicate: u64,
    pub sampled_count: u64,
    pub population_size: usize,
}

impl HistoryRow {
    fn new(generation: usize, population: &[Individual], evaluated: u64, c: &ScreenCounters) -> HistoryRow {
        let best = population.iter().map(|i| i.fitness).fold(f64::NEG_INFINITY, f64::max);
        let mean = population.iter().map(|i| i.fitness).sum::<f64>() / population.len().max(1) as f64;
        HistoryRow {
            generation,
            best_fitness: best,
            mean_fitness: mean,
            evaluated_count: evaluated,
            rejected_conflict: c.conflict,
            rejected_invalid: c.invalid,
            rejected_insensitive: c.insensitive,
            rejected_duplicate: c.duplicate,
            sampled_count: c.screened,
            population_size: population.len(),
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.generation,
            self.best_fitness,
            self.mean_fitness,
            self.evaluated_count,
            self.rejected_conflict,
            self.rejected_invalid,
            self.rejected_insensitive,
            self.rejected_duplicate,
            self.sampled_count,
            self.population_size
        )
    }

    pub fn write_csv(rows: &[HistoryRow]) -> String {
        let mut out = String::from(HISTORY_HEADER);
        out.push('\n');
        for r in rows {
            out.push_str(&r.to_csv());
            out.push('\n');
        }
        out
    }
}

/// The two diversity-prompting candidates of one generation; `None` means
/// the candidate did not reach evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffspringRecord {
    pub generation: usize,
    pub mutant_fitness: Option<f64>,
    pub random_fitness: Option<f64>,
    pub fitness: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best: Individual,
    pub population: Vec<Individual>,
    pub history: Vec<HistoryRow>,
    pub offspring: Vec<OffspringRecord>,
    pub counters: ScreenCounters,
    pub evaluated: u64,
}

/// Fitness and hash of a genome that cleared screening.
type Assessed = Option<(f64, GenomeHash)>;

/// Screening plus fitness bookkeeping shared by evolution and random search.
struct Evaluator<'a> {
    stats: &'a [LayerStats],
    ctx: FitnessContext,
    screener: Screener,
    evaluated: u64,
    max_evaluations: Option<u64>,
    max_candidates: Option<u64>,
}

impl<'a> Evaluator<'a> {
    fn new(cfg: &SearchConfig, bench: &Benchmark, stats: &'a [LayerStats]) -> Result<Self, SearchError> {
        cfg.validate()?;
        let ctx = FitnessContext::for_split(bench, BenchSplit::Validation, cfg.n_eval_cfgs, &cfg.fractions, cfg.seed)?;
        let probes = ctx.configs[..MIN_PROBES].to_vec();
        let screener = Screener::new(cfg.screen, probes)?;
        Ok(Evaluator {
            stats,
            ctx,
            screener,
            evaluated: 0,
            max_evaluations: cfg.max_evaluations,
            max_candidates: cfg.max_candidates,
        })
    }

    fn exhausted(&self) -> bool {
        self.max_evaluations.is_some_and(|m| self.evaluated >= m)
            || self.max_candidates.is_some_and(|m| self.screener.counters.screened >= m)
    }

    fn remaining_evaluations(&self) -> u64 {
        self.max_evaluations.map_or(u64::MAX, |m| m.saturating_sub(self.evaluated))
    }

    fn fitness_of(&self, outcome: &ScreenOutcome) -> Option<f64> {
        match outcome {
            ScreenOutcome::Passed { layer_scores: Ok(s), .. } => Some(self.ctx.fitness(s)),
            ScreenOutcome::Passed { layer_scores: Err(_), .. } => Some(f64::NEG_INFINITY),
            ScreenOutcome::Rejected(_) => None,
        }
    }

    /// Screens and, when it passes, evaluates one genome. Returns its
    /// fitness if it reached evaluation.
    fn assess(&mut self, genome: &ProxyGenome) -> Assessed {
        let outcome = self.screener.screen(genome, self.stats);
        let fitness = self.fitness_of(&outcome)?;
        self.evaluated += 1;
        match outcome {
            ScreenOutcome::Passed { hash, .. } => Some((fitness, hash)),
            ScreenOutcome::Rejected(_) => None,
        }
    }

    /// Screens and evaluates two genomes, concurrently when `exec` allows.
    /// The second sees the first as a duplicate if both hash equal.
    fn assess_pair(&mut self, a: &ProxyGenome, b: &ProxyGenome, exec: Exec) -> (Assessed, Assessed) {
        let screener = &self.screener;
        let stats = self.stats;
        let (oa, ob) = exec.join(|| screener.inspect(a, stats), || screener.inspect(b, stats));
        let ob = match (&oa, ob) {
            (ScreenOutcome::Passed { hash: ha, .. }, ScreenOutcome::Passed { hash: hb, .. })
                if *ha == hb && self.screener.options.duplicates =>
            {
                ScreenOutcome::Rejected(Reason::Duplicate)
            }
            (_, ob) => ob,
        };
        let (fa, fb) = exec.join(|| self.fitness_of(&oa), || self.fitness_of(&ob));
        self.screener.record(&oa);
        self.screener.record(&ob);
        let mut pack = |f: Option<f64>, o: &ScreenOutcome| {
            let f = f?;
            self.evaluated += 1;
            match o {
                ScreenOutcome::Passed { hash, .. } => Some((f, *hash)),
                ScreenOutcome::Rejected(_) => None,
            }
        };
        let ra = pack(fa, &oa);
        let rb = pack(fb, &ob);
        (ra, rb)
    }
}

fn usable(f: &Assessed) -> bool {
    matches!(f, Some((v, _)) if v.is_finite())
}

/// Index of the lowest-fitness individual; among ties, the oldest.
fn worst(population: &[Individual]) -> usize {
    let mut w = 0;
    for (i, ind) in population.iter().enumerate().skip(1) {
        let cur = &population[w];
        if ind.fitness < cur.fitness || (ind.fitness == cur.fitness && ind.born < cur.born) {
            w = i;
        }
    }
    w
}

fn best_of(population: &[Individual]) -> Individual {
    let mut b = &population[0];
    for ind in &population[1..] {
        if ind.fitness > b.fitness {
            b = ind;
        }
    }
    b.clone()
}

/// Regularized evolution over proxy genomes. Every candidate passes
/// through screening before evaluation; with diversity-prompting on, each
/// generation's mutant competes with a freshly sampled genome.
pub fn evolve(
    cfg: &SearchConfig,
    bench: &Benchmark,
    stats: &[LayerStats],
    exec: Exec,
) -> Result<SearchResult, SearchError> {
    let mut ev = Evaluator::new(cfg, bench, stats)?;
    let sampler = cfg.sampler();
    let mut init_rng = stream(cfg.seed, STREAM_INIT);
    let mut sel_rng = stream(cfg.seed, STREAM_SELECTION);
    let mut cx_rng = stream(cfg.seed, STREAM_CROSSOVER);
    let mut mut_rng = stream(cfg.seed, STREAM_MUTATION);
    let mut dps_rng = stream(cfg.seed, STREAM_DPS);

    let mut born = 0u64;
    let mut population: Vec<Individual> = Vec::with_capacity(cfg.population_size + 1);
    let mut attempts = 0u64;
    while population.len() < cfg.population_size {
        if attempts >= cfg.max_init_attempts {
            return Err(SearchError::InitFailed { attempts });
        }
        attempts += 1;
        let genome = sampler.genome(cfg.structure, &mut init_rng);
        if let Some((fitness, hash)) = ev.assess(&genome) {
            if fitness.is_finite() {
                population.push(Individual { genome, fitness, hash, born });
                born += 1;
            }
        }
    }
    log::debug!("initial population after {attempts} samples");

    let mut history = vec![HistoryRow::new(0, &population, ev.evaluated, &ev.screener.counters)];
    let mut offspring = Vec::new();
    'generations: for generation in 1..=cfg.iterations {
        let mut attempts = 0u64;
        let child = loop {
            if ev.exhausted() {
                break 'generations;
            }
            if attempts >= cfg.max_init_attempts {
                return Err(SearchError::Stalled { generation, attempts });
            }
            attempts += 1;
            let fitness: Vec<f64> = population.iter().map(|i| i.fitness).collect();
            let (pa, pb) = tournament_select(&fitness, cfg.selection_ratio, cfg.top_k, &mut sel_rng)?;
            let child = crossover(&population[pa].genome, &population[pb].genome, cfg.p_c, &mut cx_rng)?;
            let mutant = mutate(&child, cfg.p_m, sampler, &mut mut_rng);
            let (rm, random) = if cfg.dps && ev.remaining_evaluations() >= 2 {
                let random = sampler.genome(cfg.structure, &mut dps_rng);
                let (rm, rr) = ev.assess_pair(&mutant, &random, exec);
                (rm, rr.map(|r| (random, r)))
            } else {
                (ev.assess(&mutant), None)
            };
            let mutant_ok = usable(&rm);
            let random_ok = random.as_ref().is_some_and(|(_, r)| r.0.is_finite());
            if !mutant_ok && !random_ok {
                continue;
            }
            let record = OffspringRecord {
                generation,
                mutant_fitness: rm.map(|r| r.0),
                random_fitness: random.as_ref().map(|(_, r)| r.0),
                fitness: f64::NAN,
            };
            // Ties go to the mutant.
            let pick_random = random_ok && (!mutant_ok || random.as_ref().unwrap().1 .0 > rm.unwrap().0);
            let (genome, (fit, hash)) = if pick_random { random.unwrap() } else { (mutant, rm.unwrap()) };
            offspring.push(OffspringRecord { fitness: fit, ..record });
            break Individual { genome, fitness: fit, hash, born };
        };
        born += 1;
        population.push(child);
        let w = worst(&population);
        population.remove(w);
        history.push(HistoryRow::new(generation, &population, ev.evaluated, &ev.screener.counters));
    }

    Ok(SearchResult {
        best: best_of(&population),
        population,
        history,
        offspring,
        counters: ev.screener.counters,
        evaluated: ev.evaluated,
    })
}

/// Best of randomly sampled genomes, screened and counted exactly as in
/// [`evolve`], until `budget` evaluations (or `cfg.max_candidates`) are
/// spent.
pub fn random_search(
    cfg: &SearchConfig,
    bench: &Benchmark,
    stats: &[LayerStats],
    budget: u64,
) -> Result<SearchResult, SearchError> {
    if budget == 0 {
        return Err(SearchError::Config("random search needs a budget of at least one evaluation".into()));
    }
    let cfg = SearchConfig { max_evaluations: Some(budget), ..cfg.clone() };
    let mut ev = Evaluator::new(&cfg, bench, stats)?;
    let sampler = cfg.sampler();
    let mut rng = stream(cfg.seed, STREAM_RANDOM);
    let mut best: Option<Individual> = None;
    let mut history = Vec::new();
    let mut samples = 0u64;
    while !ev.exhausted() {
        if best.is_none() && samples >= cfg.max_init_attempts {
            return Err(SearchError::InitFailed { attempts: samples });
        }
        samples += 1;
        let genome = sampler.genome(cfg.structure, &mut rng);
        let Some((fitness, hash)) = ev.assess(&genome) else { continue };
        if fitness.is_finite() && best.as_ref().is_none_or(|b| fitness > b.fitness) {
            best = Some(Individual { genome, fitness, hash, born: ev.evaluated - 1 });
        }
        if let Some(b) = &best {
            history.push(HistoryRow::new(history.len(), std::slice::from_ref(b), ev.evaluated, &ev.screener.counters));
        }
    }
    let best = best.ok_or(SearchError::InitFailed { attempts: samples })?;
    Ok(SearchResult {
        population: vec![best.clone()],
        best,
        history,
        offspring: Vec::new(),
        counters: ev.screener.counters,
        evaluated: ev.evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(fitness: f64, born: u64) -> Individual {
        Individual { genome: ProxyGenome::emq(), fitness, hash: GenomeHash([0; 16]), born }
    }

    #[test]
    fn worst_prefers_older_on_ties() {
        let pop = vec![ind(0.5, 3), ind(0.1, 7), ind(0.1, 2), ind(0.9, 0)];
        assert_eq!(worst(&pop), 2);
    }

    #[test]
    fn history_csv_has_header_and_rows() {
        let pop = vec![ind(0.5, 0), ind(0.25, 1)];
        let row = HistoryRow::new(0, &pop, 2, &ScreenCounters::default());
        let csv = HistoryRow::write_csv(&[row]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
        assert_eq!(lines[1], "0,0.5,0.375,2,0,0,0,0,0,2");
    }

    #[test]
    fn config_checks() {
        assert!(SearchConfig { population_size: 1, ..SearchConfig::default() }.validate().is_err());
        assert!(SearchConfig { fractions: vec![0.0], ..SearchConfig::default() }.validate().is_err());
        assert!(SearchConfig::default().validate().is_ok());
    }
}
