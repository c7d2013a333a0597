use std::fs;
use std::path::Path;
use std::process::Command;

use smooth_lsvi::harmonics::{kernel_l1_norm, Quadrature};
use smooth_lsvi::lsvi::QEstimate;
use smooth_lsvi::validation::loglog_slope;
use smooth_lsvi_cli::{read_sweep_csv, EvalReport, KernelReport, RunRecord};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smooth-lsvi"))
}

fn run(args: &[&str]) -> i32 {
    let out = bin().args(args).output().unwrap();
    out.status.code().unwrap()
}

fn train_bandit(dir: &Path, seed: &str) -> i32 {
    run(&["train", "--env", "trig_bandit", "--seed", seed, "--episodes", "1", "--out", dir.to_str().unwrap()])
}

#[test]
fn kernel_check_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.json");
    assert_eq!(run(&["kernel-check", "--degree", "4", "--out", out.to_str().unwrap()]), 0);
    let report: KernelReport = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.pass);
    let independent = kernel_l1_norm(4, &Quadrature::new(1, 2048).unwrap()).unwrap();
    assert!((report.l1_norm - independent).abs() <= 1e-6);
}

#[test]
fn kernel_check_rejects_odd_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.json");
    assert_eq!(run(&["kernel-check", "--degree", "3", "--out", out.to_str().unwrap()]), 2);
    assert_eq!(run(&["kernel-check", "--degree", "4", "--points", "100", "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn train_bandit_and_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(train_bandit(&a, "3"), 0);
    assert_eq!(train_bandit(&b, "3"), 0);
    let ea = fs::read(a.join("estimate.json")).unwrap();
    assert_eq!(ea, fs::read(b.join("estimate.json")).unwrap());
    let record: RunRecord = serde_json::from_slice(&fs::read(a.join("run.json")).unwrap()).unwrap();
    assert!(record.value_gap.is_finite() && record.value_gap <= 0.1, "{}", record.value_gap);
    let est = QEstimate::from_json(std::str::from_utf8(&ea).unwrap()).unwrap();
    assert_eq!(record.n_queries_total, est.total_queries());
    assert_eq!(record.stages.len(), 1);
}

#[test]
fn train_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["train", "--env", "no_such_env", "--out", out]), 2);
    assert_eq!(run(&["train", "--env", "trig_bandit", "--degree", "3", "--out", out]), 2);
    assert_eq!(run(&["train", "--env", "trig_bandit", "--bogus", "--out", out]), 2);
    assert_eq!(run(&["train", "--env", "trig_bandit", "--env-params", "{\"c\": 1}", "--out", out]), 2);
    // 2000^2 grid points exceed the design cap
    assert_eq!(run(&["train", "--env", "trig_bandit", "--eps-prime", "0.001", "--out", out]), 3);
    // oracle grid beyond its cell cap
    assert_eq!(run(&["train", "--env", "smooth_chain", "--n-tot", "100", "--grid", "100000", "--out", out]), 4);
    let status = bin()
        .env("SMOOTH_LSVI_THREADS", "zero")
        .args(["train", "--env", "trig_bandit", "--out", out])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn eval_matches_training_record() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t");
    assert_eq!(train_bandit(&t, "5"), 0);
    let est = t.join("estimate.json");
    let out = dir.path().join("eval.json");
    let args = |env: &str, episodes: &str| {
        vec![
            "eval".to_string(),
            "--estimate".into(),
            est.to_str().unwrap().into(),
            "--env".into(),
            env.into(),
            "--episodes".into(),
            episodes.into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let code = |a: Vec<String>| bin().args(a).status().unwrap().code().unwrap();
    assert_eq!(code(args("trig_bandit", "0")), 2);
    assert_eq!(code(args("smooth_chain", "1")), 2);
    assert_eq!(code(args("trig_bandit", "1")), 0);
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let record: RunRecord = serde_json::from_str(&fs::read_to_string(t.join("run.json")).unwrap()).unwrap();
    // the bandit is deterministic, so the MC error is zero
    assert!((report.max_gap - record.value_gap).abs() <= 3.0 * record.value_gap_std_error + 1e-12);
    assert_eq!(report.starts.len(), 21);

    // zero weights: every action ties and the first grid action a = -1 wins
    let mut zero = QEstimate::from_json(&fs::read_to_string(&est).unwrap()).unwrap();
    for s in &mut zero.stages {
        s.theta.iter_mut().for_each(|v| *v = 0.0);
    }
    fs::write(&est, zero.to_json()).unwrap();
    assert_eq!(code(args("trig_bandit", "1")), 0);
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let want = 1.0 - (1.0 + (-std::f64::consts::PI).sin()) / 2.0;
    assert!((report.max_gap - want).abs() < 1e-9, "{} vs {want}", report.max_gap);
}

#[test]
fn sweep_search_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let code = run(&[
        "sweep",
        "--env",
        "trig_bandit",
        "--nu",
        "3",
        "--epsilon",
        "0.1,0.2,0.05,0.02",
        "--seeds",
        "0,1,2,3,4",
        "--n-tot",
        "16",
        "--episodes",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = read_sweep_csv(&out).unwrap();
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    assert_eq!(eps, vec![0.2, 0.1, 0.05, 0.02]);
    assert!(rows.iter().all(|r| r.status == "ok" && 5 * r.seeds_passed >= 20));
    assert!(rows[1].n_tot > rows[0].n_tot);
    assert!(rows.windows(2).all(|w| w[1].n_tot >= w[0].n_tot));

    // lossless round trip
    let again = dir.path().join("again.csv");
    let mut w = csv::Writer::from_path(&again).unwrap();
    for r in &rows {
        w.serialize(r).unwrap();
    }
    w.flush().unwrap();
    assert_eq!(read_sweep_csv(&again).unwrap(), rows);
    assert_eq!(fs::read(&again).unwrap(), fs::read(&out).unwrap());

    let n: Vec<f64> = rows.iter().map(|r| r.n_tot as f64).collect();
    let slope = loglog_slope(&eps, &n);
    assert!(slope < -2.0, "slope {slope}");
}

#[test]
fn sweep_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["sweep", "--env", "trig_bandit", "--nu", "3", "--epsilon", "0.1", "--out", o]), 2);
    assert_eq!(run(&["sweep", "--env", "trig_bandit", "--nu", "3", "--epsilon", "0.1,1.5", "--out", o]), 2);
}

#[test]
fn sweep_flags_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let code = run(&[
        "sweep",
        "--env",
        "trig_bandit",
        "--nu",
        "3",
        "--epsilon",
        "0.2,0.001",
        "--seeds",
        "0,1",
        "--n-tot",
        "16",
        "--cap",
        "64",
        "--episodes",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = read_sweep_csv(&out).unwrap();
    assert_eq!(rows[1].status, "cap_exceeded");
    assert!(rows[1].n_tot <= 64);
}
