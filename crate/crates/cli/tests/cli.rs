use std::path::Path;
use std::process::Command;

fn dcg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dcg"))
}

fn small_scenario(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.json");
    let text = r#"{
  "id": "small",
  "master_seed": 3,
  "trials": 3,
  "utility": {"source": "inline", "instance": {"kind": "weighted_coverage",
      "weights": [3.0, 1.0, 2.0, 4.0],
      "covers": [[0, 1], [1, 2], [0], [2, 3], [3], [1]]}},
  "agents": {"block_sizes": [2, 2, 2], "budgets": [1, 1, 1]},
  "graph": {"kind": "ring"},
  "horizon": 20,
  "samples": [20],
  "solvers": ["ds", "brute", "seq"],
  "sequences": [{"name": "a", "order": [0, 1, 2]}]
}"#;
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_replayable_csv_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let out = dir.path().join("a.csv");
    let status = dcg()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .args(["--trace", "on"])
        .status()
        .unwrap();
    assert!(status.success());
    let first = std::fs::read_to_string(&out).unwrap();
    assert!(first
        .starts_with("scenario_id,solver,seed,value,sites_covered,oracle_calls,wall_ms,bound_ok"));
    assert_eq!(first.lines().count(), 1 + 3 * 3);
    assert!(dir.path().join("a.trace.json").exists());
    let again = dcg()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(again.stdout).unwrap(), first);
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let out = dcg()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .args([
            "--solver",
            "ds",
            "--solver",
            "seq:a",
            "--trials",
            "2",
            "--T",
            "5",
            "--samples",
            "3",
        ])
        .args(["--consensus-rounds", "diam", "--seed", "11"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let solvers: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(solvers, ["ds", "seq:a", "ds", "seq:a"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dcg()
        .args(["run", "--scenario", "/nonexistent.json"])
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(1));
    let scenario = small_scenario(dir.path());
    let bad = dcg()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .args(["--T", "0"])
        .status()
        .unwrap();
    assert_eq!(bad.code(), Some(1));
    let big = dir.path().join("big.json");
    let covers: Vec<String> = (0..60).map(|i| format!("[{i}]")).collect();
    let weights: Vec<String> = (0..60).map(|_| "1.0".to_string()).collect();
    std::fs::write(
        &big,
        format!(
            r#"{{"id": "big", "master_seed": 1, "trials": 1,
  "utility": {{"source": "inline", "instance": {{"kind": "weighted_coverage", "weights": [{}], "covers": [{}]}}}},
  "agents": {{"block_sizes": [20, 20, 20], "budgets": [10, 10, 10]}},
  "graph": {{"kind": "ring"}}, "horizon": 2, "samples": [1], "solvers": ["brute", "seq"],
  "sequences": [{{"name": "a", "order": [0, 1, 2]}}]}}"#,
            weights.join(", "),
            covers.join(", ")
        ),
    )
    .unwrap();
    let out = dir.path().join("big.csv");
    let status = dcg()
        .args(["run", "--scenario"])
        .arg(&big)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn gen_scenario_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.json");
    assert!(dcg()
        .args(["gen-scenario", "--trials", "1", "--out"])
        .arg(&field)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&field).unwrap();
    assert!(text.contains("\"random_field\""));
    let scenario = small_scenario(dir.path());
    let out = dcg()
        .args(["verify", "--scenario"])
        .arg(&scenario)
        .args(["--rounding-trials", "200"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("checks passed"), "{stdout}");
}
