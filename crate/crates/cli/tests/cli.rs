use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use milq_core::model::{validate_schedule, Instance, Schedule};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/example").join(name)
}

fn milq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_milq"))
        .args(args)
        .env_remove("MILQ_SOLVER_CMD")
        .output()
        .expect("run milq")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn example_instance(dir: &Path) -> PathBuf {
    let path = dir.join("instance.json");
    let out = milq(&["instance", "--example", "--seed", "3", "--out", s(&path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn cut_emits_nine_jobs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let jobs = dir.path().join("jobs.json");
    let manifest = dir.path().join("manifest.json");
    let out = milq(&[
        "cut",
        "--circuits",
        s(&data("circuits.json")),
        "--machines",
        s(&data("machines.json")),
        "--out",
        s(&jobs),
        "--manifest",
        s(&manifest),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let jobs: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&jobs).unwrap()).unwrap();
    assert_eq!(jobs.len(), 9);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(manifest["A"].as_array().unwrap().len(), 8);
    assert_eq!(manifest["B"][0]["job_id"], "B");
}

#[test]
fn cut_rejects_expansion_above_cap() {
    let dir = tempfile::tempdir().unwrap();
    let circuits = dir.path().join("c.json");
    std::fs::write(&circuits, r#"[{"id": "W", "width": 60, "depth": 3}]"#).unwrap();
    let out = milq(&[
        "cut",
        "--circuits",
        s(&circuits),
        "--machines",
        s(&data("machines.json")),
        "--out",
        s(&dir.path().join("jobs.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1024"));
    assert!(!dir.path().join("jobs.json").exists());
}

#[test]
fn baseline_schedule_validates_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = example_instance(dir.path());
    let sched = dir.path().join("schedule.json");
    let svg = dir.path().join("gantt.svg");
    for strategy in ["baseline", "greedy"] {
        let out = milq(&[
            "schedule",
            "--instance",
            s(&inst_path),
            "--strategy",
            strategy,
            "--out",
            s(&sched),
            "--gantt",
            s(&svg),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let inst: Instance = serde_json::from_str(&std::fs::read_to_string(&inst_path).unwrap()).unwrap();
        let schedule: Schedule = serde_json::from_str(&std::fs::read_to_string(&sched).unwrap()).unwrap();
        assert!(validate_schedule(&schedule, &inst).is_empty());
        let text = std::fs::read_to_string(&svg).unwrap();
        assert_eq!(text.matches("<rect").count(), 9);
    }
}

#[test]
fn milp_without_solver_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example_instance(dir.path());
    for strategy in ["simple", "extended"] {
        let out = milq(&[
            "schedule",
            "--instance",
            s(&inst),
            "--strategy",
            strategy,
            "--out",
            s(&dir.path().join("s.json")),
        ]);
        assert_eq!(out.status.code(), Some(3));
    }
}

#[test]
fn failing_solver_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example_instance(dir.path());
    let out = milq(&[
        "schedule",
        "--instance",
        s(&inst),
        "--strategy",
        "extended",
        "--solver-cmd",
        "exit 1",
        "--out",
        s(&dir.path().join("s.json")),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn oracle_limit_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example_instance(dir.path());
    let out = milq(&[
        "schedule",
        "--instance",
        s(&inst),
        "--strategy",
        "oracle",
        "--out",
        s(&dir.path().join("s.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("limit of 5"));
}

#[test]
fn malformed_instance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"jobs\": 3}").unwrap();
    let out = milq(&["schedule", "--instance", s(&bad), "--out", s(&dir.path().join("s.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = milq(&["schedule", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn emit_lp_matches_model_size() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example_instance(dir.path());
    let lp = dir.path().join("model.lp");
    let out = milq(&["schedule", "--instance", s(&inst), "--emit-lp", s(&lp)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("\\ milq time-indexed model (extended): 3143 variables"));
    let rows = text
        .lines()
        .skip_while(|l| *l != "Subject To")
        .take_while(|l| *l != "Bounds")
        .filter(|l| l.starts_with(' ') && l.contains(':'))
        .count();
    let header_rows: usize = text.lines().next().unwrap().split(", ").nth(1).unwrap()
        .split(' ').next().unwrap().parse().unwrap();
    assert_eq!(rows, header_rows);
    assert!(String::from_utf8_lossy(&out.stderr).contains("3143 variables"));
}

#[test]
fn bench_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = milq(&[
            "bench",
            "--scenario",
            "paper-two-qpu",
            "--strategies",
            "baseline,greedy",
            "--seed",
            "9",
            "--csv",
            s(&path),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert_eq!(a.lines().next().unwrap(), "scenario,batch,seed,strategy,makespan,status,wall_time_s");
    assert_eq!(a.lines().filter(|l| l.contains(",baseline,")).count(), 10);
    assert_eq!(a.lines().filter(|l| l.contains(",greedy,")).count(), 10);
}

#[test]
fn bench_with_milp_but_no_solver_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = milq(&[
        "bench",
        "--scenario",
        "paper-three-qpu",
        "--strategies",
        "baseline,extended",
        "--csv",
        s(&dir.path().join("x.csv")),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = milq(&["bench", "--scenario", "nope", "--csv", s(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(2));
}
