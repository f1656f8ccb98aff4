use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use emq_cli::manifest::RunManifest;
use emq_core::dsl::ProxyGenome;

fn emq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emq")).args(args).env_remove("EMQ_SEED").output().expect("binary runs")
}

fn emq_env(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emq")).args(args).env("EMQ_SEED", seed).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// One shared mlp-s benchmark over the full 81-config space.
fn shared_bench() -> &'static Path {
    static DIR: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    &DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.json");
        let o = emq(&["bench", "build", "--net", "mlp-s", "--configs", "81", "--seed", "2", "--out", s(&path)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (dir, path)
    })
    .1
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(code(&emq(&["bench", "build", "--net", "mlp-s"])), 2);
    assert_eq!(code(&emq(&["bench", "build", "--net", "vgg", "--configs", "3", "--out", "x"])), 2);
    assert_eq!(code(&emq(&["evolve", "--bench", "b.json"])), 2);
    assert_eq!(code(&emq(&["--jobs", "0", "report", "--out-dir", "r"])), 2);
    assert_eq!(code(&emq(&["frobnicate"])), 2);
}

#[test]
fn build_is_deterministic_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = emq(&["bench", "build", "--net", "mlp-s", "--configs", "30", "--seed", "5", "--out", s(p)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(read(&a), read(&b));
    let m: RunManifest = serde_json::from_str(&read(&dir.path().join("a.json.manifest.json"))).unwrap();
    assert_eq!(m.command, "bench build");
    assert_eq!(m.seeds["seed"], 5);
    assert_eq!(m.outputs, vec![a.display().to_string()]);
    assert_eq!(m.config_hash.len(), 64);
}

#[test]
fn query_by_index_and_config_agree() {
    let bench = shared_bench();
    let by_idx = emq(&["bench", "query", "--bench", s(bench), "--idx", "7"]);
    assert_eq!(code(&by_idx), 0);
    let entry: serde_json::Value = serde_json::from_slice(&by_idx.stdout).unwrap();
    let cfg: Vec<String> = entry["bit_cfg"].as_array().unwrap().iter().map(|b| b.to_string()).collect();
    let by_cfg = emq(&["bench", "query", "--bench", s(bench), "--cfg", &cfg.join(",")]);
    assert_eq!(code(&by_cfg), 0);
    assert_eq!(by_idx.stdout, by_cfg.stdout);
}

#[test]
fn query_failures_exit_1_with_message() {
    let bench = shared_bench();
    let o = emq(&["bench", "query", "--bench", s(bench), "--idx", "81"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("81"));
    assert_eq!(code(&emq(&["bench", "query", "--bench", s(bench), "--cfg", "2,2,2"])), 1);
    assert_eq!(code(&emq(&["bench", "query", "--bench", "/nonexistent/b.json", "--idx", "0"])), 1);
}

#[test]
fn build_beyond_space_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = emq(&["bench", "build", "--net", "mlp-s", "--configs", "82", "--out", s(&out)]);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());
}

#[test]
fn evolve_outputs_reload_and_repeat() {
    let bench = shared_bench();
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = emq(&[
            "evolve",
            "--bench",
            s(bench),
            "--out-dir",
            s(&out),
            "--seed",
            "4",
            "--iterations",
            "30",
            "--n-eval-cfgs",
            "20",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["best.json", "history.csv", "summary.json"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let genome = ProxyGenome::from_json(&read(&a.join("best.json"))).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&read(&a.join("summary.json"))).unwrap();
    assert_eq!(summary["hash"], emq_core::dsl::canonical_hash(&genome).to_string());
    let history = read(&a.join("history.csv"));
    assert_eq!(history.lines().count(), 1 + 31);
    assert!(a.join("manifest.json").exists());
}

#[test]
fn eval_rows_summary_and_oracle() {
    let bench = shared_bench();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = emq(&[
        "eval",
        "--bench",
        s(bench),
        "--baseline",
        "bparams",
        "--oracle",
        "--runs",
        "5",
        "--n-configs",
        "20",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read(&out);
    let lines: Vec<&str> = rows.lines().collect();
    assert_eq!(lines[0], "proxy,run,seed,rho_20,rho_50,rho_100,kendall,pearson");
    assert_eq!(lines.iter().filter(|l| l.starts_with("bparams,")).count(), 5);
    for l in lines.iter().filter(|l| l.starts_with("oracle,")) {
        for v in l.split(',').skip(3) {
            assert_eq!(v.parse::<f64>().unwrap(), 1.0, "{l}");
        }
    }
    let summary = read(&dir.path().join("e.summary.csv"));
    assert_eq!(summary.lines().next().unwrap(), "proxy,metric,mean,std,runs");
    assert_eq!(summary.lines().count(), 1 + 2 * 5);
}

#[test]
fn eval_needs_a_proxy() {
    let bench = shared_bench();
    let dir = tempfile::tempdir().unwrap();
    let o = emq(&["eval", "--bench", s(bench), "--out", s(&dir.path().join("e.csv"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn shipped_emq_evaluates_with_baselines() {
    let bench = shared_bench();
    let dir = tempfile::tempdir().unwrap();
    let proxy = dir.path().join("emq.json");
    std::fs::write(&proxy, emq_cli::SHIPPED_EMQ_JSON).unwrap();
    let out = dir.path().join("e.csv");
    let o = emq(&[
        "eval",
        "--bench",
        s(bench),
        "--proxy",
        s(&proxy),
        "--baseline",
        "all",
        "--runs",
        "2",
        "--n-configs",
        "20",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read(&out);
    let emq_rows: Vec<&str> = rows.lines().filter(|l| l.starts_with("emq,")).collect();
    // The genome file and the built-in baseline share a name.
    assert_eq!(emq_rows.len(), 4);
    for l in emq_rows {
        let vals: Vec<f64> = l.split(',').skip(3).map(|v| v.parse().unwrap()).collect();
        assert!(vals.iter().all(|v| v.is_finite() && (-1.0..=1.0).contains(v)), "{l}");
    }
}

#[test]
fn assign_feasible_infeasible_and_sweep() {
    let bench = shared_bench();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.json");
    let pareto = dir.path().join("p.csv");
    let o = emq(&[
        "assign",
        "--bench",
        s(bench),
        "--baseline",
        "hawq_v2",
        "--budget-mb",
        "0.0006",
        "--out",
        s(&out),
        "--pareto",
        s(&pareto),
        "--sweep",
        "10",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert!(report["model_size_mb"].as_f64().unwrap() <= 0.0006);
    assert_eq!(report["weight_bits"].as_array().unwrap().len(), 4);
    let mut last = f64::NEG_INFINITY;
    let mut r = csv::Reader::from_path(&pareto).unwrap();
    let mut n = 0;
    for rec in r.records() {
        let size: f64 = rec.unwrap()[1].parse().unwrap();
        assert!(size > last);
        last = size;
        n += 1;
    }
    assert!(n >= 2);

    let o = emq(&["assign", "--bench", s(bench), "--baseline", "snip", "--budget-mb", "0.00001", "--out", s(&out)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn assign_sweep_flags_go_together() {
    let o =
        emq(&["assign", "--net", "mlp-s", "--baseline", "snip", "--budget-mb", "1", "--out", "a.json", "--sweep", "4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    assert_eq!(code(&emq_env(&["bench", "build", "--net", "mlp-s", "--configs", "10", "--out", s(&a)], "11")), 0);
    assert_eq!(code(&emq(&["bench", "build", "--net", "mlp-s", "--configs", "10", "--seed", "11", "--out", s(&b)])), 0);
    assert_eq!(code(&emq(&["bench", "build", "--net", "mlp-s", "--configs", "10", "--seed", "12", "--out", s(&c)])), 0);
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(code(&emq_env(&["bench", "build", "--net", "mlp-s", "--configs", "10", "--out", s(&a)], "x")), 2);
}

#[test]
fn jobs_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(code(&emq(&["--jobs", "1", "bench", "build", "--net", "mlp-s", "--configs", "20", "--out", s(&a)])), 0);
    assert_eq!(code(&emq(&["--jobs", "3", "bench", "build", "--net", "mlp-s", "--configs", "20", "--out", s(&b)])), 0);
    assert_eq!(read(&a), read(&b));
}

#[test]
fn report_merges_and_is_idempotent() {
    let bench = shared_bench();
    let dir = tempfile::tempdir().unwrap();
    let ev = dir.path().join("ev");
    let e = dir.path().join("e.csv");
    let o = emq(&["evolve", "--bench", s(bench), "--out-dir", s(&ev), "--iterations", "10", "--n-eval-cfgs", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o =
        emq(&["eval", "--bench", s(bench), "--baseline", "snip", "--runs", "2", "--n-configs", "20", "--out", s(&e)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let rep = dir.path().join("rep");
    let files = ["report.md", "eval_summary.csv", "rejections.csv", "evolution.csv"];
    let mut first = Vec::new();
    for round in 0..2 {
        let o = emq(&["report", "--eval", s(&e), "--history", s(&ev), "--out-dir", s(&rep)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let now: Vec<String> = files.iter().map(|f| read(&rep.join(f))).collect();
        if round == 0 {
            first = now;
        } else {
            assert_eq!(first, now);
        }
    }
    let md = &first[0];
    for col in ["conflict", "invalid", "insensitive", "duplicate"] {
        assert!(md.contains(col), "{col}");
    }
    assert!(
        read(&rep.join("rejections.csv")).starts_with("run,sampled,evaluated,conflict,invalid,insensitive,duplicate")
    );
}

#[test]
fn report_missing_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("rep");
    assert_eq!(code(&emq(&["report", "--eval", s(&dir.path().join("none.csv")), "--out-dir", s(&rep)])), 1);
    assert_eq!(code(&emq(&["report", "--history", s(&dir.path().join("none")), "--out-dir", s(&rep)])), 1);
    assert_eq!(code(&emq(&["report", "--out-dir", s(&rep)])), 1);
}
