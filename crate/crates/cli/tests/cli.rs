use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistfactor"))
        .args(args)
        .env_remove("TWISTFACTOR_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn factor_worked_example() {
    let out = run(&["factor", "35", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "factor");
    assert_eq!(v["factors"], serde_json::json!([5, 7]));
    assert_eq!(v["seed"], 1);
    assert!(v["curves_used"].is_u64() && v["oracle_queries"].is_u64());
}

#[test]
fn factor_prime_makes_no_queries() {
    let v = json(&run(&["factor", "7"]));
    assert_eq!(v["factors"], serde_json::json!([7]));
    assert_eq!(v["oracle_queries"], 0);
}

#[test]
fn factor_rejects_squares() {
    for (n, p) in [("45", "3"), ("175", "5"), ("12", "2")] {
        let out = run(&["factor", n]);
        assert_eq!(out.status.code(), Some(1), "{n}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("not squarefree") && err.contains(&format!("repeated prime {p}")), "{err}");
    }
}

#[test]
fn factor_with_both_oracles() {
    for oracle in ["factored", "direct"] {
        let v = json(&run(&["factor", "1155", "--oracle", oracle, "--seed", "4"]));
        assert_eq!(v["factors"], serde_json::json!([3, 5, 7, 11]));
        assert_eq!(v["config"]["oracle"], oracle);
    }
    let v = json(&run(&["factor", "10062757", "--seed", "9"]));
    assert_eq!(v["factors"], serde_json::json!([1009, 9973]));
}

#[test]
fn factor_exhaustion_exit_code() {
    // One curve, one twist, D = 1: some seeds cannot split.
    let mut exhausted = 0;
    for seed in 0..30 {
        let s = seed.to_string();
        let out = run(&[
            "factor", "1022117", "--max-curves", "1", "--max-d", "2", "--D", "1", "--seed", &s,
        ]);
        match out.status.code() {
            Some(0) => {}
            Some(2) => {
                let v = json(&out);
                assert_eq!(v["status"], "exhausted");
                assert_eq!(v["cofactor"], 1022117);
                exhausted += 1;
            }
            other => panic!("unexpected exit {other:?}"),
        }
    }
    assert!(exhausted > 0);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["factor"],
        vec!["factor", "0x23"],
        vec!["factor", "35", "--seed", "-1"],
        vec!["factor", "35", "--max-d", "1"],
        vec!["factor", "35", "--oracle", "remote"],
        vec!["census", "--pmin", "5"],
        vec!["nonresidue", "9", "5"],
        vec!["bogus"],
    ] {
        assert_eq!(run(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn identical_invocations_are_byte_identical() {
    let a = run(&["factor", "10403", "--seed", "77"]);
    let b = run(&["factor", "10403", "--seed", "77"]);
    assert_eq!(a.stdout, b.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_twistfactor"))
        .args(["factor", "10403"])
        .env("TWISTFACTOR_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
    assert_eq!(json(&a)["seed"], 77);
}

#[test]
fn count_and_nonresidue() {
    let v = json(&run(&["count", "35", "1", "1"]));
    assert_eq!(v["count"], 45);
    let v = json(&run(&["count", "35", "4", "8"]));
    assert_eq!(v["count"], 15);
    assert_eq!(run(&["count", "35", "0", "7"]).status.code(), Some(1));

    let v = json(&run(&["nonresidue", "7", "5"]));
    assert_eq!(v["d_min"], 6);
    let out = run(&["nonresidue", "7", "5", "--cap", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "not_found");
}

#[test]
fn census_to_stdout_and_file() {
    let out = run(&["census", "--pmin", "5", "--pmax", "7", "--D-list", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "p,D,phi_direct,phi_mobius,bound22,bound23,s_classes,total_classes"
    );
    assert!(lines[1].starts_with("5,1,1,1,"));
    assert!(lines[2].starts_with("7,1,3,3,"));
    assert_eq!(lines.len(), 3);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("census.csv");
    let p = path.to_str().unwrap();
    let out = run(&["census", "--pmin", "5", "--pmax", "5", "--D-list", "6", "--out", p]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["rows"], 1);
    let csv = std::fs::read_to_string(&path).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[6], row[7]), ("12", "12"));

    let out = run(&["census", "--pmin", "24", "--pmax", "28", "--D-list", "1"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);

    let bad = dir.path().join("missing").join("x.csv");
    let out = run(&["census", "--pmin", "5", "--pmax", "7", "--D-list", "1", "--out", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}
