use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_procdual"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn random(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join(format!("s{seed}.json"));
    let seed = seed.to_string();
    let o = run(&["random", "--atoms", "5", "--horizon", "3", "--seed", &seed, "-o", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn random_then_verify_passes() {
    let dir = TempDir::new().unwrap();
    let s = random(dir.path(), 1);
    let o = run(&["verify", s.to_str().unwrap(), "--samples", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = stdout_json(&o);
    assert_eq!(r["summary"]["fail"], 0);
    assert!(r["records"].as_array().unwrap().len() > 20);
}

#[test]
fn random_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let x = std::fs::read(random(a.path(), 7)).unwrap();
    let y = std::fs::read(random(b.path(), 7)).unwrap();
    assert_eq!(x, y);
}

#[test]
fn list_checks() {
    let o = run(&["--list-checks"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let ids: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(ids.len(), 24);
    assert!(ids.windows(2).all(|w| w[0] < w[1]));
    assert!(ids.contains(&"quasimartingale"));
}

#[test]
fn usage_and_validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"space\": ").unwrap();
    let o = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let s = random(dir.path(), 2);
    assert_eq!(code(&run(&["verify", s.to_str().unwrap(), "--checks", "nope"])), 2);
    assert_eq!(code(&run(&["verify", dir.path().join("missing.json").to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["norm", s.to_str().unwrap(), "--norm", "L7", "--rv", "xi"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn planted_defects_exit_1() {
    let dir = TempDir::new().unwrap();
    let s = random(dir.path(), 3);
    for defect in ["non-optional-u", "broken-martingale", "perturbed-decomposition"] {
        let out = dir.path().join(format!("{defect}.json"));
        let o = run(&["plant", s.to_str().unwrap(), "--defect", defect, "-o", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let o = run(&["verify", out.to_str().unwrap(), "--samples", "3"]);
        assert_eq!(code(&o), 1, "{defect}");
        let r = stdout_json(&o);
        assert!(r["summary"]["fail"].as_u64().unwrap() > 0);
    }
}

#[test]
fn markdown_report_to_file() {
    let dir = TempDir::new().unwrap();
    let s = random(dir.path(), 4);
    let out = dir.path().join("report.md");
    let o = run(&[
        "verify",
        s.to_str().unwrap(),
        "--checks",
        "left-limit,holder",
        "--format",
        "md",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("# Verification report"));
    assert!(text.contains("| left-limit |"));
    assert!(!text.contains("| snell |"));
}

#[test]
fn single_computations() {
    let dir = TempDir::new().unwrap();
    let s = random(dir.path(), 5);
    let f = s.to_str().unwrap();

    let n = stdout_json(&run(&["norm", f, "--norm", "Linf", "--rv", "xi"]));
    let p = stdout_json(&run(&["polar", f, "--norm", "L1", "--rv", "xi"]));
    assert!((n["value"].as_f64().unwrap() - p["polar"].as_f64().unwrap()).abs() < 1e-12);

    let q = stdout_json(&run(&["quotient", f, "--norm", "L1", "--process", "martingale"]));
    assert!(q["value"].as_f64().unwrap() >= 0.0);

    let d = stdout_json(&run(&["doob", f, "--process", "supermartingale"]));
    assert!(d["tv_a"].as_array().unwrap().iter().all(|v| v.as_f64().unwrap() >= 0.0));

    let v = stdout_json(&run(&["varp", f, "--norm", "L1", "--process", "adapted", "--max-n", "2"]));
    assert_eq!(v["max_n"], 2);
    assert!(v["value"].as_f64().unwrap() >= 0.0);

    let pr = stdout_json(&run(&["project", f, "--process", "raw", "--predictable"]));
    assert_eq!(pr["predictable"], true);

    let o = run(&["quotient", f, "--norm", "L2", "--process", "adapted"]);
    assert_eq!(code(&o), 2);
}
