//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use emq_core::baselines::{baseline_layer_scores, BaselineId};
use emq_core::bench::{build_benchmark, Benchmark};
use emq_core::desk::Desk;
use emq_core::dsl::fixtures::random_stats;
use emq_core::dsl::{
    evaluate_layer, ProxyGenome, Sampler, ScreenOptions, ScreenOutcome, Screener, Structure, MIN_PROBES,
};
use emq_core::netzoo::{Arch, LayerHessian, NetHessian};
use emq_core::quant::{calibrate, min_max_scheme, size_mb, QuantScheme};
use emq_core::search::{
    evolve, kendall, pearson, random_search, spearman, spearman_at_topk, BenchSplit, FitnessContext, HistoryRow,
    SearchConfig,
};
use emq_core::tensor::{default_hvp_step, hutchinson_diagonal, hvp, power_iteration, Tensor, TensorError, EPSILON};
use emq_core::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

/// Evolve histories gathered by earlier criteria, checked by the last one:
/// (label, configured population size, rows).
static LOGGED: Mutex<Vec<(String, usize, Vec<HistoryRow>)>> = Mutex::new(Vec::new());

fn log_history(label: String, population: usize, rows: Vec<HistoryRow>) {
    LOGGED.lock().unwrap().push((label, population, rows));
}

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_secs: u64, v: Verdict) -> Verdict {
    let t = elapsed.as_secs_f64();
    match v {
        Ok(d) if t > limit_secs as f64 => Err(format!("{d}; took {t:.1}s, limit {limit_secs}s")),
        Ok(d) => Ok(format!("{d}; {t:.1}s")),
        Err(d) => Err(format!("{d}; {t:.1}s")),
    }
}

// ---------------------------------------------------------------------------
// 1

fn rank_metrics() -> Verdict {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    let mut bad = Vec::new();
    let mut check = |name: &str, got: f64, want: f64| {
        if !close(got, want) {
            bad.push(format!("{name}: {got} != {want}"));
        }
    };
    check("spearman identity", spearman(&x, &x).unwrap().value, 1.0);
    check("kendall identity", kendall(&x, &x).unwrap().value, 1.0);
    check("pearson identity", pearson(&x, &x).unwrap().value, 1.0);
    check("spearman reversal", spearman(&x, &rev).unwrap().value, -1.0);
    check("kendall reversal", kendall(&x, &rev).unwrap().value, -1.0);
    check("pearson reversal", pearson(&x, &rev).unwrap().value, -1.0);
    let (a, b) = ([1.0, 2.0, 3.0], [2.0, 1.0, 3.0]);
    // sum d^2 = 2 gives 1 - 12/24; two concordant pairs, one discordant.
    check("spearman [1,2,3]/[2,1,3]", spearman(&a, &b).unwrap().value, 0.5);
    check("kendall [1,2,3]/[2,1,3]", kendall(&a, &b).unwrap().value, 1.0 / 3.0);
    check("pearson [1,2,3]/[2,1,3]", pearson(&a, &b).unwrap().value, 0.5);
    let gt = [4.0, 3.0, 2.0, 1.0];
    let est = [3.0, 4.0, 2.0, 1.0];
    check("top-50% swap", spearman_at_topk(&gt, &est, 0.5).unwrap().value, -1.0);
    check("top-100% ordered", spearman_at_topk(&gt, &gt, 1.0).unwrap().value, 1.0);
    check("top-100% reversed", spearman_at_topk(&gt, &[1.0, 2.0, 3.0, 4.0], 1.0).unwrap().value, -1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..40);
        // Coarse values so ties occur.
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64).collect();
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64).collect();
        if spearman_at_topk(&g, &e, 1.0).unwrap() != spearman(&g, &e).unwrap() {
            mismatches += 1;
        }
    }
    if mismatches > 0 {
        bad.push(format!("top-100% differs from spearman on {mismatches}/1000 pairs"));
    }
    ensure(
        bad.is_empty(),
        if bad.is_empty() { "12 hand values, 1000 full-fraction pairs".into() } else { bad.join("; ") },
    )
}

// ---------------------------------------------------------------------------
// 2

fn emq_representable() -> Verdict {
    let g = ProxyGenome::from_json(emq_cli::SHIPPED_EMQ_JSON).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let s = random_stats(&mut rng, i);
        let mean_log_v = s.v.data().iter().map(|v| v.abs().ln()).sum::<f64>() / s.v.numel() as f64;
        let l1_w = s.w.data().iter().map(|w| w.abs()).sum::<f64>();
        let closed = mean_log_v * (l1_w / (s.w.numel() as f64 + EPSILON)).sqrt();
        let got = evaluate_layer(&g, &s).map_err(|e| format!("fixture {i}: {e:?}"))?;
        let rel = if got == closed { 0.0 } else { (got - closed).abs() / closed.abs().max(got.abs()) };
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-9, format!("max relative error {worst:.2e} over 100 fixtures"))
}

// ---------------------------------------------------------------------------
// Shared cnn-s desk and 425-config benchmark for 3, 4 and 5.

struct Shared {
    desk: Desk,
    bench: Benchmark,
}

fn shared() -> &'static Shared {
    static S: OnceLock<Shared> = OnceLock::new();
    S.get_or_init(|| {
        let t = Instant::now();
        let desk = Desk::default_for(Arch::CnnS, 0).expect("desk");
        let bench = build_benchmark(&desk, 425, &[2, 3, 4], 0, Exec::default()).expect("benchmark");
        println!("           cnn-s desk and 425-config benchmark ready in {:.1}s", t.elapsed().as_secs_f64());
        Shared { desk, bench }
    })
}

// ---------------------------------------------------------------------------
// 3

fn validity_ordering() -> Verdict {
    let sh = shared();
    let t = Instant::now();
    let cfg = SearchConfig::default();
    let ctx = FitnessContext::for_split(&sh.bench, BenchSplit::Validation, 50, &cfg.fractions, 0).unwrap();
    let probes = ctx.configs[..MIN_PROBES].to_vec();
    // Validity is a property of each genome alone, so the duplicate stage is off.
    let opts = ScreenOptions { duplicates: false, ..ScreenOptions::ALL };
    let rate = |s: Structure, osp: bool| {
        let mut sc = Screener::new(opts, probes.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..1000)
            .filter(|_| {
                matches!(sc.screen(&Sampler { osp }.genome(s, &mut rng), &sh.desk.stats), ScreenOutcome::Passed { .. })
            })
            .count()
    };
    let plain: Vec<usize> = Structure::ALL.iter().map(|&s| rate(s, false)).collect();
    let osp: Vec<usize> = Structure::ALL.iter().map(|&s| rate(s, true)).collect();
    let ordered = plain[0] > plain[1] && plain[1] > plain[2];
    let raised = plain.iter().zip(&osp).all(|(a, b)| b > a);
    let detail = format!(
        "valid/1000 sequential {} branched {} dag {}; with OSP {} {} {}",
        plain[0], plain[1], plain[2], osp[0], osp[1], osp[2]
    );
    within(t.elapsed(), 120, ensure(ordered && raised, detail))
}

// ---------------------------------------------------------------------------
// 4

fn screening_efficiency() -> Verdict {
    let sh = shared();
    let t = Instant::now();
    let stream = |screen: ScreenOptions| {
        let c = SearchConfig { max_candidates: Some(1000), iterations: 1_000_000, screen, ..SearchConfig::default() };
        let e = evolve(&c, &sh.bench, &sh.desk.stats, Exec::default()).expect("evolve");
        log_history(
            format!("candidate stream, screening {}", if screen == ScreenOptions::ALL { "on" } else { "off" }),
            c.population_size,
            e.history.clone(),
        );
        let r = random_search(&c, &sh.bench, &sh.desk.stats, 1_000_000).expect("random search");
        (e.evaluated as f64 / e.counters.screened as f64, e.counters, r.evaluated as f64 / r.counters.screened as f64)
    };
    let (on, c, on_random) = stream(ScreenOptions::ALL);
    let (off, _, off_random) = stream(ScreenOptions::NONE);
    let detail = format!(
        "evaluated fraction with screening {:.1}% (conflict {}, invalid {}, insensitive {}, duplicate {} of {}), without {:.1}%; random stream {:.1}% / {:.1}%",
        100.0 * on,
        c.conflict,
        c.invalid,
        c.insensitive,
        c.duplicate,
        c.screened,
        100.0 * off,
        100.0 * on_random,
        100.0 * off_random
    );
    within(t.elapsed(), 300, ensure(on <= 0.10 && off >= 0.90, detail))
}

// ---------------------------------------------------------------------------
// 5

fn search_effectiveness() -> Verdict {
    let sh = shared();
    let t = Instant::now();
    let base = SearchConfig::default();
    let bparams = baseline_layer_scores(BaselineId::Bparams, &sh.desk.stats, None, 0).unwrap().layer_scores;
    let (_, test_all) = sh.bench.split().unwrap();
    let full_test = FitnessContext::from_positions(&sh.bench, &test_all, &base.fractions);
    let scores = |g: &ProxyGenome| emq_core::dsl::layer_scores(g, &sh.desk.stats).expect("scores");

    let mut evolve_test = Vec::new();
    let mut random_test = Vec::new();
    let mut evolve_full = Vec::new();
    let mut random_full = Vec::new();
    let mut best: Option<(f64, ProxyGenome, FitnessContext)> = None;
    for seed in 0..3u64 {
        let c = SearchConfig { seed, max_evaluations: Some(200), iterations: 1_000_000, ..base.clone() };
        let e = evolve(&c, &sh.bench, &sh.desk.stats, Exec::default()).expect("evolve");
        let r = random_search(&c, &sh.bench, &sh.desk.stats, 200).expect("random search");
        log_history(format!("200-evaluation run, seed {seed}"), c.population_size, e.history.clone());
        let test = FitnessContext::for_split(&sh.bench, BenchSplit::Test, 50, &base.fractions, seed).unwrap();
        let (es, rs) = (scores(&e.best.genome), scores(&r.best.genome));
        evolve_test.push(test.fitness(&es));
        random_test.push(test.fitness(&rs));
        evolve_full.push(full_test.fitness(&es));
        random_full.push(full_test.fitness(&rs));
        if best.as_ref().is_none_or(|(f, _, _)| e.best.fitness > *f) {
            best = Some((e.best.fitness, e.best.genome.clone(), test));
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (em, rm) = (mean(&evolve_test), mean(&random_test));
    let (_, genome, test) = best.expect("three runs");
    let rho = |s: &[f64]| test.report(&test.estimates(s)).unwrap().rho_at[2];
    let (rho_best, rho_bparams) = (rho(&scores(&genome)), rho(&bparams));
    let detail = format!(
        "mean test fitness evolve {em:.3} vs random {rm:.3} (full test split {:.3} vs {:.3}); run-best rho@100% {rho_best:.3} vs bparams {rho_bparams:.3}",
        mean(&evolve_full),
        mean(&random_full)
    );
    within(t.elapsed(), 1800, ensure(em >= rm && rho_best > rho_bparams, detail))
}

// ---------------------------------------------------------------------------
// 6

/// `sum_i a_i theta_i^2` per layer, Hessian `diag(2a)`.
struct Quadratic {
    a: Vec<[f64; 3]>,
    theta: Vec<Tensor>,
}

impl LayerHessian for Quadratic {
    fn num_layers(&self) -> usize {
        self.a.len()
    }

    fn layer_param(&self, layer: usize) -> &Tensor {
        &self.theta[layer]
    }

    fn layer_hvp(&self, layer: usize, v: &Tensor) -> Result<Tensor, TensorError> {
        let a = self.a[layer];
        let grad = |t: &Tensor| Ok(Tensor::from_vec(t.data().iter().zip(a).map(|(t, a)| 2.0 * a * t).collect()));
        hvp(grad, &self.theta[layer], v, default_hvp_step(&self.theta[layer]))
    }
}

fn estimator_oracles() -> Verdict {
    let scales = [1.0, 10.0, 0.01, 250.0, 1e-3];
    let q = Quadratic {
        a: scales.iter().map(|&s| [s, 2.0 * s, 3.0 * s]).collect(),
        theta: scales.iter().map(|_| Tensor::from_vec(vec![0.3, -0.2, 0.9])).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut trace_err, mut eig_err): (f64, f64) = (0.0, 0.0);
    for (i, s) in scales.iter().enumerate() {
        let diag = hutchinson_diagonal(|v| q.layer_hvp(i, v), &[3], 64, &mut rng).map_err(|e| e.to_string())?;
        trace_err = trace_err.max((diag.sum() - 12.0 * s).abs() / (12.0 * s));
        let p = power_iteration(|v| q.layer_hvp(i, v), &[3], 100, 1e-10, &mut rng).map_err(|e| e.to_string())?;
        eig_err = eig_err.max((p.eigenvalue - 6.0 * s).abs() / (6.0 * s));
    }
    ensure(
        trace_err <= 0.05 && eig_err <= 1e-3,
        format!("worst trace error {:.2}%, worst top-eigenvalue error {:.4}%", 100.0 * trace_err, 100.0 * eig_err),
    )
}

// ---------------------------------------------------------------------------
// 7

fn quantizer_contract() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bits = [2u8, 3, 4, 8];
    let (mut checked, mut clipped, mut violations, mut not_identity) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..10_000 {
        let n = rng.gen_range(1..96);
        let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
        let mut data: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) * mag).collect();
        if n > 4 && rng.gen_bool(0.3) {
            data[0] *= 20.0;
        }
        let t = Tensor::from_vec(data);
        let b = bits[i % bits.len()];
        for scheme in [calibrate(&t, b), min_max_scheme(&t, b)] {
            let (lo, hi) = scheme.clip_range();
            for &x in t.data() {
                if x < lo || x > hi {
                    clipped += 1;
                    continue;
                }
                checked += 1;
                if (x - scheme.qdq(x)).abs() > scheme.scale / 2.0 + 1e-12 {
                    violations += 1;
                }
            }
        }
        let full = calibrate(&t, 32);
        if full != QuantScheme::IDENTITY || full.fake_quantize(&t) != t {
            not_identity += 1;
        }
    }
    ensure(
        violations == 0 && not_identity == 0,
        format!(
            "{violations} bound violations over {checked} in-range elements ({clipped} clipped elements excluded); {not_identity} non-identity 32-bit paths"
        ),
    )
}

// ---------------------------------------------------------------------------
// 8

fn emq_bin(args: &[&str]) -> Result<std::process::Output, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_emq"))
        .args(args)
        .env_remove("EMQ_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("`emq {}` failed: {}", args.join(" "), String::from_utf8_lossy(&o.stderr).trim()));
    }
    Ok(o)
}

fn brute_force(scores: &[f64], numels: &[usize], budget: f64) -> (Vec<u8>, f64) {
    let mut best: Option<(Vec<u8>, f64, f64)> = None;
    for a in [2u8, 3, 4] {
        for b in [2u8, 3, 4] {
            for c in [2u8, 3, 4] {
                for d in [2u8, 3, 4] {
                    let bits = vec![a, b, c, d];
                    let size = size_mb(numels, &bits);
                    if size > budget {
                        continue;
                    }
                    let score: f64 = scores.iter().zip(&bits).map(|(s, &b)| b as f64 * s).sum();
                    let better = match &best {
                        None => true,
                        Some((bb, bs, bz)) => {
                            score > *bs || (score == *bs && (size < *bz || (size == *bz && bits < *bb)))
                        }
                    };
                    if better {
                        best = Some((bits, score, size));
                    }
                }
            }
        }
    }
    let (bits, score, _) = best.expect("feasible budget");
    (bits, score)
}

fn allocation_oracle() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let desk = Desk::default_for(Arch::MlpS, 0).map_err(|e| e.to_string())?;
    let numels = desk.net.layer_numels();
    if numels.len() != 4 {
        return Err(format!("expected a 4-layer net, got {}", numels.len()));
    }
    let genome_path = dir.path().join("emq.json");
    std::fs::write(&genome_path, emq_cli::SHIPPED_EMQ_JSON).map_err(|e| e.to_string())?;
    let emq_scores = emq_core::dsl::layer_scores(&ProxyGenome::emq(), &desk.stats).map_err(|e| format!("{e:?}"))?;
    let oracle = NetHessian { net: &desk.net, batch: &desk.calib };

    let mut scorers: Vec<(String, Vec<String>, Vec<f64>)> = Vec::new();
    for id in BaselineId::ALL {
        let s = baseline_layer_scores(id, &desk.stats, Some(&oracle), 0).map_err(|e| e.to_string())?.layer_scores;
        scorers.push((id.name().to_string(), vec!["--baseline".into(), id.name().into()], s));
    }
    scorers.push(("emq genome".into(), vec!["--proxy".into(), genome_path.display().to_string()], emq_scores));

    let lo = size_mb(&numels, &[2; 4]);
    let hi = size_mb(&numels, &[4; 4]);
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for frac in [0.25, 0.5, 0.8] {
        let budget = lo + frac * (hi - lo);
        let budget_s = format!("{budget}");
        for (name, flags, scores) in &scorers {
            let out = dir.path().join("a.json");
            let mut args = vec!["assign", "--net", "mlp-s", "--net-seed", "0", "--seed", "0", "--budget-mb", &budget_s];
            args.extend(flags.iter().map(String::as_str));
            let out_s = out.display().to_string();
            args.extend(["--out", &out_s]);
            emq_bin(&args)?;
            let report: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(&out).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
            let got: Vec<u8> = serde_json::from_value(report["weight_bits"].clone()).map_err(|e| e.to_string())?;
            let (want, want_score) = brute_force(scores, &numels, budget);
            let got_score: f64 = scores.iter().zip(&got).map(|(s, &b)| b as f64 * s).sum();
            cases += 1;
            if got != want && !(got_score == want_score && size_mb(&numels, &got) <= budget) {
                mismatches.push(format!("{name} at {budget:.6} MB: {got:?} vs {want:?}"));
            }
        }
    }
    ensure(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{cases} assignments (10 baselines + genome, 3 budgets) equal the 81-config argmax")
        } else {
            mismatches.join("; ")
        },
    )
}

// ---------------------------------------------------------------------------
// 9

fn same_files(a: &Path, b: &Path, names: &[&str]) -> Result<(), String> {
    for n in names {
        let x = std::fs::read(a.join(n)).map_err(|e| format!("{n}: {e}"))?;
        let y = std::fs::read(b.join(n)).map_err(|e| format!("{n}: {e}"))?;
        if x != y {
            return Err(format!("{n} differs between runs"));
        }
    }
    Ok(())
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |tag: &str| -> Result<std::path::PathBuf, String> {
        let d = dir.path().join(tag);
        let p = |n: &str| d.join(n).display().to_string();
        emq_bin(&["bench", "build", "--net", "mlp-s", "--configs", "81", "--seed", "3", "--out", &p("b.json")])?;
        emq_bin(&[
            "evolve",
            "--bench",
            &p("b.json"),
            "--out-dir",
            &p("ev"),
            "--seed",
            "3",
            "--iterations",
            "60",
            "--n-eval-cfgs",
            "20",
        ])?;
        emq_bin(&[
            "eval",
            "--bench",
            &p("b.json"),
            "--proxy",
            &p("ev/best.json"),
            "--baseline",
            "all",
            "--oracle",
            "--runs",
            "3",
            "--n-configs",
            "20",
            "--seed",
            "3",
            "--out",
            &p("e.csv"),
        ])?;
        Ok(d)
    };
    let (a, b) = (run("a")?, run("b")?);
    same_files(&a, &b, &["b.json", "ev/best.json", "ev/history.csv", "ev/summary.json", "e.csv", "e.summary.csv"])?;
    let mut r = csv::Reader::from_path(a.join("ev/history.csv")).map_err(|e| e.to_string())?;
    let rows = r.deserialize().collect::<Result<Vec<HistoryRow>, _>>().map_err(|e| e.to_string())?;
    log_history("CLI evolve run".into(), 20, rows);
    Ok("bench build, evolve and eval outputs byte-identical across two runs".into())
}

// ---------------------------------------------------------------------------
// 10

fn elitism() -> Verdict {
    let logged = LOGGED.lock().unwrap();
    if logged.is_empty() {
        return Err("no evolve histories were logged".into());
    }
    let mut bad = Vec::new();
    let mut generations = 0;
    for (label, pop, rows) in logged.iter() {
        generations += rows.len();
        if let Some(w) = rows.windows(2).find(|w| w[1].best_fitness < w[0].best_fitness) {
            bad.push(format!("{label}: best fell at generation {}", w[1].generation));
        }
        if let Some(r) = rows.iter().find(|r| r.population_size != *pop) {
            bad.push(format!("{label}: population {} at generation {}", r.population_size, r.generation));
        }
    }
    ensure(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} runs, {generations} logged generations", logged.len())
        } else {
            bad.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("rank metrics", rank_metrics),
        ("EMQ representability", emq_representable),
        ("validity ordering", validity_ordering),
        ("screening efficiency", screening_efficiency),
        ("search effectiveness", search_effectiveness),
        ("estimator oracles", estimator_oracles),
        ("quantizer contract", quantizer_contract),
        ("allocation oracle", allocation_oracle),
        ("determinism", determinism),
        ("elitism invariant", elitism),
    ];
    // Keep panic messages out of the report; they become FAIL details.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match verdict {
            Ok(d) => println!("criterion {:>2} PASS {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
