use std::fs;
use std::path::Path;
use std::process::Command as Process;

use activeset_cli::files::{ResultFile, RESULT_FILE};
use activeset_cli::{
    cmd_discover, cmd_evaluate, cmd_ptdf, cmd_solve, cmd_table, cmd_validate_theorems, Cli, Command,
};
use clap::Parser;

fn parse(args: &[&str]) -> Command {
    let mut full = vec!["activeset"];
    full.extend_from_slice(args);
    Cli::try_parse_from(full).unwrap().command
}

fn discover(args: &[&str]) -> anyhow::Result<ResultFile> {
    let mut full = vec!["discover"];
    full.extend_from_slice(args);
    match parse(&full) {
        Command::Discover(a) => cmd_discover(&a),
        _ => unreachable!(),
    }
}

fn evaluate(args: &[&str]) -> anyhow::Result<activeset_cli::files::EvalFile> {
    let mut full = vec!["evaluate"];
    full.extend_from_slice(args);
    match parse(&full) {
        Command::Evaluate(a) => cmd_evaluate(&a),
        _ => unreachable!(),
    }
}

fn table(args: &[&str]) -> anyhow::Result<activeset_cli::report::Table> {
    let mut full = vec!["table"];
    full.extend_from_slice(args);
    match Cli::try_parse_from([&["activeset"][..], &full].concat()) {
        Ok(Cli { command: Command::Table(a), .. }) => cmd_table(&a),
        Ok(_) => unreachable!(),
        Err(e) => Err(e.into()),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn discover_one_set_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n");
    let file = discover(&["--case", "case3", "--out", p(&out)]).unwrap();
    assert_eq!(activeset_cli::report::summary_line(&file), "K=1 M=1 W=13259 R=0.0");
    for name in ["result.json", "keys.json", "snapshot.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let uni = discover(&["--case", "case3", "--dist", "uniform", "--out", p(&dir.path().join("u"))]).unwrap();
    assert_eq!(uni.result.k_observed(), 1);
    assert_eq!(uni.result.keys(), file.result.keys());
}

#[test]
fn replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |sub: &str| {
        let text = fs::read_to_string(dir.path().join(sub).join(RESULT_FILE)).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["result"]["metadata"] = serde_json::Value::Null;
        (v, fs::read(dir.path().join(sub).join("keys.json")).unwrap())
    };
    for sub in ["a", "b"] {
        discover(&["--case", "case6_congested", "--alpha", "0.1", "--epsilon", "0.05", "--delta", "0.05", "--out", p(&dir.path().join(sub))]).unwrap();
    }
    assert_eq!(read("a"), read("b"));
}

#[test]
fn resume_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let light = ["--alpha", "0.3", "--epsilon", "0.2", "--delta", "0.2", "--max-m", "40"];
    let mut args = vec!["--case", "case6_congested", "--sigma-frac", "0.2", "--out", p(&out)];
    args.extend(light);
    let first = discover(&args).unwrap();
    args.push("--resume");
    let again = discover(&args).unwrap();
    assert_eq!(first.result.observed, again.result.observed);
    assert_eq!(first.result.m, again.result.m);
    args.extend(["--seed", "9"]);
    let err = discover(&args).unwrap_err();
    assert!(err.to_string().contains("snapshot"), "{err}");
}

#[test]
fn missing_case_file() {
    let err = discover(&["--case", "no/such/case.m", "--out", "unused"]).unwrap_err();
    assert!(err.to_string().contains("file not found"));
}

#[test]
fn evaluate_and_tabulate() {
    let dir = tempfile::tempdir().unwrap();
    let n3 = dir.path().join("n3");
    let n6 = dir.path().join("n6");
    discover(&["--case", "case3", "--out", p(&n3)]).unwrap();
    discover(&["--case", "case6_congested", "--out", p(&n6)]).unwrap();

    let eval = evaluate(&["--case", "case3", "--result", p(&n3), "--n-test", "100"]).unwrap();
    assert_eq!(eval.report.success_probability, 1.0);
    assert!(n3.join("eval.csv").exists());

    let err = evaluate(&["--case", "case3", "--result", p(&n6), "--n-test", "10"]).unwrap_err();
    assert!(err.to_string().contains("mismatch"), "{err}");

    let t = table(&[p(&n6), p(&n3)]).unwrap();
    assert_eq!(t.header.len(), 6);
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.rows[0][0], "case3");
    assert_eq!(t.rows[0][5], "1.0");
    assert_eq!(t.rows[1][5], "-");
    assert!(t.to_markdown().lines().count() == 4);
    assert!(t.to_csv().unwrap().starts_with("case,K_M,M,W_M,R,P(p*)\n"));

    assert!(table(&[]).is_err());
    assert!(table(&[p(&dir.path().join("missing"))]).is_err());
}

#[test]
fn theorem_suite_preconditions() {
    let err = match parse(&["validate-theorems", "--trials", "10"]) {
        Command::ValidateTheorems(a) => cmd_validate_theorems(&a).unwrap_err(),
        _ => unreachable!(),
    };
    assert!(err.to_string().contains("at least"));
}

#[test]
fn solve_and_ptdf() {
    let args = match parse(&["solve", "--case", "case3"]) {
        Command::Solve(a) => a,
        _ => unreachable!(),
    };
    let text = cmd_solve(&args).unwrap();
    assert!(text.contains("gen 2 (bus 2) >= pmin"), "{text}");
    assert!(text.starts_with("objective 2300.0000"), "{text}");
    let csv = cmd_ptdf(&args).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn json_case_files() {
    let dir = tempfile::tempdir().unwrap();
    let net = activeset::dcopf::bundled::load("case5").unwrap();
    let path = dir.path().join("case5.json");
    fs::write(&path, net.to_json()).unwrap();
    let file = discover(&["--case", p(&path), "--alpha", "0.3", "--epsilon", "0.2", "--out", p(&dir.path().join("o"))]).unwrap();
    assert_eq!(file.case.name, "case5");
    assert_eq!(file.result.k_observed(), 1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_activeset");
    let out = Process::new(bin).args(["discover", "--case", "missing.m"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("file not found"));

    let dir = tempfile::tempdir().unwrap();
    let out = Process::new(bin)
        .args(["--jobs", "2", "discover", "--case", "case3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "K=1 M=1 W=13259 R=0.0");

    let out = Process::new(bin).args(["--jobs", "0", "solve", "--case", "case3"]).output().unwrap();
    assert!(!out.status.success());
}
